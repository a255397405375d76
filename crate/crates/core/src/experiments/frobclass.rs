//! Per-character unitary class extraction for the shipped descriptors:
//! power sums to depth `r + 2`, reconstruction, residual gates, and the
//! flagged-fraction statistic of the generic-vanishing picture.

use super::report::fmt_f64;
use super::{buckets_to_char_sums, diagonal_power_sums, Csv, ExperimentConfig, Report, RunOutput};
use crate::curves::HyperellipticCurve;
use crate::gf::Tower;
use crate::mellin::FrobeniusClass;
use crate::torus::TorusCtx;
use crate::tracefn::{legendre_counts, ObjectDescriptor};
use crate::C64;

/// Reconstructs every base character's class from per-level power sums.
fn classes_from_levels(
    sums_by_level: &[Vec<C64>],
    r: usize,
    tol: f64,
) -> Result<Vec<FrobeniusClass>, crate::mellin::MellinError> {
    let units = sums_by_level[0].len();
    let depth = sums_by_level.len();
    let mut out = Vec::with_capacity(units - 1);
    for flat in 1..units {
        let ps: Vec<C64> = (0..depth).map(|i| sums_by_level[i][flat]).collect();
        out.push(FrobeniusClass::from_power_sums(&ps, r, tol)?);
    }
    Ok(out)
}

fn summarize(
    report: &mut Report,
    csv: &mut Csv,
    label: &str,
    q: u64,
    classes: &[FrobeniusClass],
    flagged_bound: f64,
) {
    let total = classes.len() as f64;
    let good = classes
        .iter()
        .filter(|c| c.unimodularity_residual <= 1e-3 && c.newton_residual <= 1e-3)
        .count() as f64;
    let flagged = classes.iter().filter(|c| c.ramified_suspect).count() as f64;
    report.assert_at_most(
        &format!("{label}-good-fraction-shortfall"),
        1.0 - good / total,
        0.05,
        "generic purity: residual gates pass on at least 95% of characters",
    );
    report.assert_at_most(
        &format!("{label}-flagged-fraction"),
        flagged / total,
        flagged_bound,
        "generic vanishing: ramified-suspect fraction is bounded by C/q",
    );
    for (i, c) in classes.iter().enumerate() {
        if i < 4000 {
            csv.row(&[
                label.into(),
                q.to_string(),
                (i + 1).to_string(),
                c.rank.to_string(),
                fmt_f64(c.trace.0),
                fmt_f64(c.trace.1),
                fmt_f64(c.unimodularity_residual),
                fmt_f64(c.newton_residual),
                (c.ramified_suspect as u8).to_string(),
            ]);
        }
    }
}

pub fn run_frobclass(cfg: &ExperimentConfig) -> Result<RunOutput, Box<dyn std::error::Error>> {
    let start = std::time::Instant::now();
    let which = cfg.get("descriptor")?.to_string();
    let mut report = Report::new("frobclass");
    for (k, v) in cfg.echo() {
        report.echo_input(&k, v);
    }
    let mut csv = Csv::new(&[
        "descriptor", "q", "char_flat", "rank", "trace_re", "trace_im",
        "unimodularity_residual", "newton_residual", "flagged",
    ]);

    match which.as_str() {
        "kloosterman_diag" => {
            let q = cfg.u64("q")?;
            let desc = ObjectDescriptor::kloosterman_diagonal();
            let r = desc.tannakian_dim()? as usize;
            let depth = r + 2;
            let tower = Tower::new(q, depth)?;
            let sums = diagonal_power_sums(&desc, &tower, depth).sums;
            let classes = classes_from_levels(&sums, r, 1e-3)?;
            summarize(&mut report, &mut csv, "kloosterman-diag", q, &classes, 20.0 / q as f64);
        }
        "gauss_degenerate" => {
            let q = cfg.u64("q")?;
            let desc = ObjectDescriptor::gauss_degenerate(1, 1);
            let r = desc.tannakian_dim()? as usize;
            let depth = r + 2;
            let tower = Tower::new(q, depth)?;
            let sums = diagonal_power_sums(&desc, &tower, depth).sums;
            let classes = classes_from_levels(&sums, r, 1e-3)?;
            summarize(&mut report, &mut csv, "gauss-degenerate", q, &classes, 20.0 / q as f64);
        }
        "legendre_torus" => {
            let p = cfg.u64("p")?;
            let f = cfg.u64_list("f_coeffs")?;
            let desc = ObjectDescriptor::legendre_torus(p, f.clone());
            let r = desc.tannakian_dim()? as usize;
            let depth = r + 2;
            let tower = Tower::new(p, depth)?;
            let base = tower.base().clone();
            let torus = TorusCtx::new(base.clone(), f)?;
            let base_level = torus.unit_group(base)?;
            let units = base_level.structure.order() as usize;
            let mut sums_by_level = Vec::with_capacity(depth);
            for n in 1..=depth {
                let kn = tower.level(n);
                let counts = legendre_counts(kn);
                let mut buckets = vec![0i64; units];
                for x in 0..kn.order() {
                    if let Some(handle) = torus.norm_of_embedded(kn, x) {
                        if let Some(flat) = base_level.encode_unit(handle) {
                            buckets[flat as usize] += counts[x as usize];
                        }
                    }
                }
                let scale = -1.0 / kn.order() as f64;
                let complex: Vec<C64> =
                    buckets.iter().map(|&b| C64::new(b as f64 * scale, 0.0)).collect();
                sums_by_level.push(buckets_to_char_sums(&base_level.structure, &complex));
            }
            let classes = classes_from_levels(&sums_by_level, r, 1e-3)?;
            summarize(&mut report, &mut csv, "legendre-torus", p, &classes, 20.0 / p as f64);
        }
        "jacobian" => {
            let q = cfg.u64("q")?;
            let h = cfg.u64_list("h_coeffs").unwrap_or_else(|_| vec![1, 0, 0, 0, 0, 1]);
            let desc = ObjectDescriptor::jacobian_constant(h.clone());
            let r = desc.tannakian_dim()? as usize;
            let depth = r + 2;
            let tower = Tower::new(q, depth)?;
            let base = tower.base().clone();
            let curve = HyperellipticCurve::new(base.clone(), h)?;
            let genus = curve.genus();
            let counts: Vec<u64> =
                (1..=genus).map(|n| curve.count_points(tower.level(n)).unwrap()).collect();
            let zeta = curve.zeta_numerator(&counts);
            let order = curve.jacobian_order(&zeta, 1);
            let jg = curve.jacobian_structure(&base, order)?;
            let units = jg.structure.order() as usize;
            let mut sums_by_level = Vec::with_capacity(depth);
            for n in 1..=depth {
                let kn = tower.level(n);
                let mut buckets = vec![0i64; units];
                for pt in curve.all_points(kn) {
                    let d = curve.embed_point(kn, pt)?;
                    let nd = if n == 1 { d } else { curve.norm_divisor(kn, &d) };
                    let flat = jg.structure.encode_flat(jg.packer.pack(&nd))?;
                    buckets[flat as usize] += 1;
                }
                let scale = desc.norm_factor(kn.order());
                let complex: Vec<C64> =
                    buckets.iter().map(|&b| C64::new(b as f64 * scale, 0.0)).collect();
                sums_by_level.push(buckets_to_char_sums(&jg.structure, &complex));
            }
            let classes = classes_from_levels(&sums_by_level, r, 1e-3)?;
            summarize(&mut report, &mut csv, "jacobian", q, &classes, 20.0 / q as f64);
        }
        other => return Err(format!("unknown descriptor `{other}`").into()),
    }

    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutput { report, csv: vec![("frobenius_classes.csv".into(), csv.finish())] })
}

/// JSON records for the class export: char id, rank, characteristic
/// polynomial coefficients, eigenvalue angles, residuals.
pub fn classes_to_json(classes: &[FrobeniusClass]) -> String {
    #[derive(serde::Serialize)]
    struct Record<'a> {
        char_id: usize,
        rank: usize,
        coeffs: &'a [(f64, f64)],
        eigen_angles: Vec<f64>,
        unimodularity_residual: f64,
        newton_residual: f64,
        flagged: bool,
    }
    let records: Vec<Record> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| Record {
            char_id: i + 1,
            rank: c.rank,
            coeffs: &c.char_poly,
            eigen_angles: c
                .eigenvalues
                .iter()
                .map(|&(re, im)| im.atan2(re))
                .collect(),
            unimodularity_residual: c.unimodularity_residual,
            newton_residual: c.newton_residual,
            flagged: c.ramified_suspect,
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("class serialization")
}
