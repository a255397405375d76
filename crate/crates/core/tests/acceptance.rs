//! Acceptance suite: every criterion runs at its pinned tolerance and
//! prints one `criterion N ...: PASS/FAIL` line.  The experiment-driven
//! criteria load the same configs the CLI ships.

use num_complex::Complex64;

use mf_core::experiments::{run, ExperimentConfig, Report};
use mf_core::gf::{build_field, Tower};
use mf_core::mellin::{spectrum_from_values, SpectrumMethod};
use mf_core::rmt::{GroupFamily, HaarSampler, MomentKind};
use mf_core::tracefn::ObjectDescriptor;
use mf_core::C64;

fn config(name: &str) -> ExperimentConfig {
    let path = format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    ExperimentConfig::parse(&text).expect("config parses")
}

fn run_and_print(criterion: &str, cfg_name: &str) -> Report {
    let out = run(&config(cfg_name)).expect("experiment runs");
    print_report(criterion, &out.report);
    out.report
}

fn print_report(criterion: &str, report: &Report) {
    for m in &report.measurements {
        if let Some(pass) = m.pass {
            println!(
                "criterion {criterion} [{}] {}: value {:.6e}{}",
                if pass { "PASS" } else { "FAIL" },
                m.name,
                m.value,
                m.reference
                    .map(|r| format!(" vs {r:.6e} (tol {:.1e})", m.tolerance.unwrap_or(0.0)))
                    .unwrap_or_default(),
            );
        }
    }
    println!(
        "criterion {criterion}: {} ({:.1}s)",
        if report.all_passed() { "PASS" } else { "FAIL" },
        report.wall_seconds
    );
    assert!(report.all_passed(), "criterion {criterion} failed: {:?}", report.failed_names());
}

// --- criterion 1: exactness suite ---------------------------------------

struct Lcg(u64);
impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 11
    }
    fn uniform(&mut self, n: u64) -> u64 {
        self.next() % n
    }
    fn complex(&mut self) -> C64 {
        let a = self.next() as f64 / u64::MAX as f64 * 2e3 - 1e3;
        let b = self.next() as f64 / u64::MAX as f64 * 2.0 - 1.0;
        Complex64::new(a / 1e3, b)
    }
}

#[test]
fn criterion_01_exactness_suite() {
    let start = std::time::Instant::now();
    let mut rng = Lcg(0x5eed);
    // group shapes with |G| <= 10^4: additive, multiplicative, product,
    // torus units, and a genus-2 Jacobian
    let shapes: Vec<(&str, Vec<u64>)> = vec![
        ("ga-f5^5", vec![5; 5]),
        ("gm-f7^4", vec![7u64.pow(4) - 1]),
        ("gmga-f31", vec![30, 31]),
        ("torus-split-f31-d2", vec![30, 30]),
        ("jacobian-f7", {
            let k = build_field(7, 1).unwrap();
            let c = mf_core::curves::HyperellipticCurve::new(k, vec![1, 0, 0, 0, 0, 1]).unwrap();
            let t = Tower::new(7, 2).unwrap();
            let counts: Vec<u64> =
                (1..=2).map(|n| c.count_points(t.level(n)).unwrap()).collect();
            let zeta = c.zeta_numerator(&counts);
            let order = c.jacobian_order(&zeta, 1);
            let jg = c.jacobian_structure(t.level(1), order).unwrap();
            jg.structure.invariant_factors().to_vec()
        }),
    ];
    let mut worst_invert = 0.0f64;
    let mut worst_plancherel = 0.0f64;
    let mut worst_orth = 0.0f64;
    let mut worst_fft_naive = 0.0f64;
    for (shape, dims) in &shapes {
        let order: u64 = dims.iter().product();
        assert!(order <= 10_000, "{shape} too large");
        for trial in 0..20 {
            // a random trace-function table: a few point masses plus a
            // smooth character-sum component, i.e. the value tables real
            // descriptors produce, with random data
            let mut values = vec![Complex64::new(0.0, 0.0); order as usize];
            for v in values.iter_mut() {
                *v = rng.complex() / order as f64;
            }
            for _ in 0..3 {
                let at = rng.uniform(order) as usize;
                values[at] += rng.complex();
            }
            let spec =
                spectrum_from_values(dims, &values, 1, &format!("{shape}-{trial}"), SpectrumMethod::Fft)
                    .unwrap();
            // inversion
            let back = spec.invert();
            for (a, b) in values.iter().zip(&back) {
                worst_invert = worst_invert.max((a - b).norm());
            }
            // Plancherel, both sides independently
            let (lhs, rhs) = spec.plancherel_sides(&values);
            worst_plancherel = worst_plancherel.max((lhs - rhs).abs() / lhs.max(1e-12));
            // orthogonality
            let total: C64 = spec.values.iter().sum();
            let want = values[0] * order as f64;
            worst_orth = worst_orth
                .max((total - want).norm() / spec.values.iter().map(|s| s.norm()).sum::<f64>().max(1.0));
            // fft vs naive: all 20 trials on the small shapes, spot
            // checks on the large ones
            if order <= 1000 || trial < 3 {
                let naive =
                    spectrum_from_values(dims, &values, 1, shape, SpectrumMethod::Naive).unwrap();
                let scale: f64 =
                    spec.values.iter().map(|v| v.norm()).fold(1e-12, f64::max);
                for (a, b) in spec.values.iter().zip(&naive.values) {
                    worst_fft_naive = worst_fft_naive.max((a - b).norm() / scale);
                }
            }
        }
    }
    let pass = worst_invert < 1e-9 && worst_plancherel < 1e-9 && worst_orth < 1e-9;
    println!(
        "criterion 1 inversion {worst_invert:.2e}, plancherel {worst_plancherel:.2e}, \
         orthogonality {worst_orth:.2e}, fft-vs-naive {worst_fft_naive:.2e} \
         ({:.1}s): {}",
        start.elapsed().as_secs_f64(),
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
    assert!(worst_fft_naive < 1e-8, "fft/naive disagreement");
    assert!(start.elapsed().as_secs_f64() < 60.0, "criterion 1 runtime");
}

// --- criteria 2 + 3: Kloosterman Sato-Tate and the fourth moment ---------

#[test]
fn criterion_02_kloosterman_sato_tate() {
    let report = run_and_print("2", "kloosterman_salie.cfg");
    assert!(report.wall_seconds < 300.0, "criterion 2 runtime");
}

#[test]
fn criterion_03_fourth_moment_two() {
    let report = run_and_print("3", "moments_kloosterman.cfg");
    assert!(report.wall_seconds < 600.0, "criterion 3 runtime");
}

#[test]
fn criterion_04_eighth_moment_torus() {
    let report = run_and_print("4", "moments_torus_f31.cfg");
    assert!(report.wall_seconds < 900.0, "criterion 4 runtime");
}

#[test]
fn criterion_05_degenerate_gauss() {
    let report = run_and_print("5", "moments_gauss.cfg");
    assert!(report.wall_seconds < 60.0, "criterion 5 runtime");
}

// --- criterion 6: class reconstruction on every shipped descriptor -------

#[test]
fn criterion_06_frobenius_reconstruction() {
    let start = std::time::Instant::now();
    for cfg in [
        "frobclass_kloosterman_q31.cfg",
        "frobclass_kloosterman_q101.cfg",
        "frobclass_gauss_q101.cfg",
        "frobclass_torus_a0.cfg",
        "frobclass_torus_a1.cfg",
        "frobclass_jacobian_q11.cfg",
    ] {
        run_and_print("6", cfg);
    }
    assert!(start.elapsed().as_secs_f64() < 1200.0, "criterion 6 runtime");
}

// --- criterion 7: variance of the von Mangoldt function ------------------

#[test]
fn criterion_07_variance_a0() {
    let report = run_and_print("7", "variance_a0.cfg");
    assert!(report.wall_seconds < 1800.0, "criterion 7 runtime");
}

#[test]
fn criterion_07_variance_a1() {
    let report = run_and_print("7", "variance_a1.cfg");
    assert!(report.wall_seconds < 1800.0, "criterion 7 runtime");
}

// --- criterion 8: Jacobian symplectic classes ----------------------------

#[test]
fn criterion_08_jacobian_usp2() {
    let report = run_and_print("8", "jacobian_st.cfg");
    assert!(report.wall_seconds < 1200.0, "criterion 8 runtime");
}

// --- criterion 9: Sidon suite --------------------------------------------

#[test]
fn criterion_09_sidon_suite() {
    let report = run_and_print("9", "sidon.cfg");
    assert!(report.wall_seconds < 300.0, "criterion 9 runtime");
}

// --- criterion 10: L-function identity -----------------------------------

#[test]
fn criterion_10_lhat_identity() {
    let report = run_and_print("10", "lhat.cfg");
    assert!(report.wall_seconds < 60.0, "criterion 10 runtime");
}

// --- criterion 11: RMT reference -----------------------------------------

#[test]
fn criterion_11_rmt_reference() {
    let start = std::time::Instant::now();
    let mut ok = true;
    // M4(U(4)) = 2 +- 0.1 at 1e5 samples, fixed seed
    let mut s = HaarSampler::new(20_240_801);
    let sample = s.sample_traces(GroupFamily::Unitary, 4, 100_000);
    let m4 = sample.abs_moment(4);
    ok &= (m4 - 2.0).abs() <= 0.1;
    println!("criterion 11 M4(U(4)) = {m4:.4} vs 2 +- 0.1");
    // M8(U(5)) = 24 +- 1.5
    let sample5 = s.sample_traces(GroupFamily::Unitary, 5, 100_000);
    let m8 = sample5.abs_moment(8);
    ok &= (m8 - 24.0).abs() <= 1.5;
    println!("criterion 11 M8(U(5)) = {m8:.3} vs 24 +- 1.5");
    // power-trace second moment min(m, r) +- 0.1 for m <= 6, r <= 6
    for r in 1..=6usize {
        for m in 1..=6u32 {
            let est = s.power_trace_second_moment(r, m, 100_000);
            let want = mf_core::rmt::reference_moment(
                GroupFamily::Unitary,
                r as u32,
                MomentKind::PowerTraceSecond(m),
            )
            .unwrap();
            let good = (est - want).abs() <= 0.1;
            if !good {
                println!("criterion 11 |Tr(g^{m})|^2 over U({r}): {est:.4} vs {want}");
            }
            ok &= good;
        }
    }
    println!(
        "criterion 11 ({:.1}s): {}",
        start.elapsed().as_secs_f64(),
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
    assert!(start.elapsed().as_secs_f64() < 120.0, "criterion 11 runtime");
}

// --- criterion 12: determinant ratios ------------------------------------

#[test]
fn criterion_12_det_ratio() {
    let report = run_and_print("12", "det_ratio.cfg");
    assert!(report.wall_seconds < 600.0, "criterion 12 runtime");
    // the first field admitting the degree-4 configuration
    let report7 = run_and_print("12", "det_ratio_p7.cfg");
    assert!(report7.wall_seconds < 600.0, "criterion 12 runtime at p = 7");
}

// --- shared smoke: dimension formulas pinned -----------------------------

#[test]
fn shipped_dimension_formulas() {
    assert_eq!(ObjectDescriptor::kloosterman_diagonal().tannakian_dim().unwrap(), 2);
    assert_eq!(ObjectDescriptor::gauss_degenerate(1, 1).tannakian_dim().unwrap(), 1);
    assert_eq!(
        ObjectDescriptor::legendre_torus(5, vec![2, 0, 3, 0, 1]).tannakian_dim().unwrap(),
        8
    );
    assert_eq!(
        ObjectDescriptor::legendre_torus(5, vec![0, 1, 1, 1, 1]).tannakian_dim().unwrap(),
        7
    );
    assert_eq!(
        ObjectDescriptor::jacobian_constant(vec![1, 0, 0, 0, 0, 1]).tannakian_dim().unwrap(),
        2
    );
}
