//! Fourier `L`-functions of point masses: rational-form detection, the
//! multiplicative-group identity `Lhat(M, T) L(M_e, T) = L(M_e, qT)`,
//! and the Weil-number classification of all zeros and poles.

use num_complex::Complex64;

use super::report::fmt_f64;
use super::{Csv, ExperimentConfig, Report, RunOutput};
use crate::mellin::lhat_series;
use crate::C64;

/// Multiplies the truncated series of `1/(1 - alpha T)` into `coeffs`.
fn series_times_geometric(coeffs: &[C64], alpha: C64, upto: usize) -> Vec<C64> {
    // (sum c_j T^j) * (sum alpha^i T^i)
    let mut out = vec![C64::new(0.0, 0.0); upto + 1];
    for (j, &c) in coeffs.iter().enumerate().take(upto + 1) {
        let mut pw = C64::new(1.0, 0.0);
        for i in 0..=(upto - j) {
            out[i + j] += c * pw;
            pw *= alpha;
        }
    }
    out
}

pub fn run_lhat_demo(cfg: &ExperimentConfig) -> Result<RunOutput, Box<dyn std::error::Error>> {
    let start = std::time::Instant::now();
    let q = cfg.u64("q")?;
    let trunc = cfg.u64_or("truncation", 12)? as usize;
    let ang_num = cfg.u64_or("alpha_angle_num", 0)?;
    let ang_den = cfg.u64_or("alpha_angle_den", 1)?.max(1);
    let alpha = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * ang_num as f64 / ang_den as f64);
    let mut report = Report::new("lhat");
    for (k, v) in cfg.echo() {
        report.echo_input(&k, v);
    }
    let mut csv = Csv::new(&["object", "kind", "value_re", "value_im", "weight"]);

    // --- G_m, point mass at e with unitary alpha: b_n = (q^n - 1) alpha^n
    let b_gm: Vec<C64> = (1..=trunc)
        .map(|n| alpha.powu(n as u32) * ((q as f64).powi(n as i32) - 1.0))
        .collect();
    let s_gm = lhat_series(&b_gm, q, 1e-6);
    report.assert_true(
        "gm-rational-form-found",
        s_gm.recurrence_found,
        "minimal linear recurrence located by Berlekamp-Massey",
    );
    // identity: Lhat(M, T) * L(M_e, T) = L(M_e, qT) coefficientwise,
    // with L(M_e, T) = 1/(1 - alpha T)
    let coeffs: Vec<C64> = s_gm.coeffs.iter().map(|&(re, im)| C64::new(re, im)).collect();
    let lhs = series_times_geometric(&coeffs, alpha, trunc);
    let rhs: Vec<C64> = (0..=trunc)
        .map(|n| alpha.powu(n as u32) * (q as f64).powi(n as i32))
        .collect();
    let mut worst = 0.0f64;
    for (l, r) in lhs.iter().zip(&rhs) {
        worst = worst.max((l - r).norm() / r.norm().max(1.0));
    }
    report.assert_at_most(
        "gm-stalk-identity",
        worst,
        1e-9,
        "geometric-series identity of the multiplicative-group L-function",
    );
    // Weil classification of every detected zero and pole
    let mut all_weil = true;
    for (role, list) in [("zero", &s_gm.zeros), ("pole", &s_gm.poles)] {
        for &(re, im, w) in list {
            all_weil &= w.is_some();
            csv.row(&[
                "gm-point-mass".into(),
                role.into(),
                fmt_f64(re),
                fmt_f64(im),
                w.map(|v| v.to_string()).unwrap_or_else(|| "none".into()),
            ]);
        }
    }
    report.assert_true(
        "gm-roots-are-weil",
        all_weil,
        "zeros and poles of the rational form have Weil-number moduli",
    );

    // --- G_a, point mass at 0 with the same twist: b_n = q^n alpha^n
    let b_ga: Vec<C64> = (1..=trunc)
        .map(|n| alpha.powu(n as u32) * (q as f64).powi(n as i32))
        .collect();
    let s_ga = lhat_series(&b_ga, q, 1e-6);
    report.assert_true(
        "ga-rational-form-found",
        s_ga.recurrence_found,
        "minimal linear recurrence located by Berlekamp-Massey",
    );
    report.assert_true(
        "ga-shape",
        s_ga.zeros.is_empty() && s_ga.poles.len() == 1,
        "additive point mass has a single geometric pole",
    );
    for &(re, im, w) in &s_ga.poles {
        csv.row(&[
            "ga-point-mass".into(),
            "pole".into(),
            fmt_f64(re),
            fmt_f64(im),
            w.map(|v| v.to_string()).unwrap_or_else(|| "none".into()),
        ]);
    }

    // --- vanishing stalk at e: the L-function is identically 1
    let b_zero = vec![Complex64::new(0.0, 0.0); trunc];
    let s_zero = lhat_series(&b_zero, q, 1e-6);
    let unit = s_zero
        .coeffs
        .iter()
        .enumerate()
        .all(|(i, &(re, im))| {
            let want = if i == 0 { 1.0 } else { 0.0 };
            (re - want).abs() + im.abs() < 1e-12
        });
    report.assert_true(
        "zero-stalk-gives-one",
        unit && s_zero.zeros.is_empty() && s_zero.poles.is_empty(),
        "objects with vanishing stalk at e have trivial L-function",
    );

    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutput { report, csv: vec![("lhat_roots.csv".into(), csv.finish())] })
}
