//! Reference measures and statistics for the compact classical groups
//! `U(r)`, `SU(r)`, `USp(2r)`, `SO(r)`: exact trace moments, Haar
//! sampling, and empirical-vs-reference comparison.
//!
//! Exact moments:
//!
//! * `E |Tr g|^{2m}` over `U(r)` is the number of pairs of standard
//!   Young tableaux with at most `r` rows on `m` boxes,
//!   `sum_{lambda |- m, len <= r} (f^lambda)^2`, which is `m!` once
//!   `m <= r`;
//! * `E |Tr(g^m)|^2` over `U(r)` is `min(m, r)` (Diaconis–Evans);
//! * the self-dual families have fourth moment 3;
//! * the `SU(2)` trace pushforward is the semicircle on `[-2, 2]` with
//!   even moments the Catalan numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::C64;

#[derive(Debug, Error)]
pub enum RmtError {
    #[error("unsupported (family, moment) pair: {0}")]
    UnsupportedMoment(String),
    #[error("empty sample")]
    EmptySample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GroupFamily {
    Unitary,
    SpecialUnitary,
    /// Compact symplectic group `USp(2r)`; the rank field is `r`.
    UnitarySymplectic,
    SpecialOrthogonal,
}

/// Moment kinds supported by the exact tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentKind {
    /// `E |Tr g|^{2m}`.
    AbsTrace2m(u32),
    /// `E |Tr(g^m)|^2`.
    PowerTraceSecond(u32),
    /// `E (Tr g)^{2m}` for the SU(2) trace (Sato–Tate / Catalan).
    SatoTateEven(u32),
}

/// Exact reference moment for `(family, rank, kind)`.
pub fn reference_moment(family: GroupFamily, rank: u32, kind: MomentKind) -> Result<f64, RmtError> {
    match (family, kind) {
        (GroupFamily::Unitary, MomentKind::AbsTrace2m(m)) => Ok(unitary_abs_trace_moment(m, rank)),
        (GroupFamily::Unitary, MomentKind::PowerTraceSecond(m)) => Ok(m.min(rank) as f64),
        (GroupFamily::UnitarySymplectic, MomentKind::AbsTrace2m(2)) => {
            // self-dual standard representation: fourth moment 3 for
            // 2r >= 4; USp(2) = SU(2) has fourth moment 2
            Ok(if rank >= 2 { 3.0 } else { 2.0 })
        }
        (GroupFamily::SpecialOrthogonal, MomentKind::AbsTrace2m(2)) if rank >= 5 => Ok(3.0),
        (GroupFamily::SpecialUnitary, MomentKind::SatoTateEven(m)) if rank == 2 => {
            Ok(catalan(m) as f64)
        }
        (GroupFamily::UnitarySymplectic, MomentKind::SatoTateEven(m)) if rank == 1 => {
            Ok(catalan(m) as f64)
        }
        (f, k) => Err(RmtError::UnsupportedMoment(format!("{f:?}, {k:?} at rank {rank}"))),
    }
}

/// `sum over partitions of m with at most r parts of (f^lambda)^2`.
fn unitary_abs_trace_moment(m: u32, r: u32) -> f64 {
    let mut total = 0u64;
    let mut partition = Vec::new();
    gen_partitions(m as usize, m as usize, &mut partition, &mut |p: &[usize]| {
        if p.len() <= r as usize {
            let f = hook_length_count(p);
            total += f * f;
        }
    });
    total as f64
}

fn gen_partitions(
    remaining: usize,
    max_part: usize,
    cur: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if remaining == 0 {
        emit(cur);
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        cur.push(part);
        gen_partitions(remaining - part, part, cur, emit);
        cur.pop();
    }
}

/// Number of standard Young tableaux of the given shape, by the hook
/// length formula.
fn hook_length_count(shape: &[usize]) -> u64 {
    let n: usize = shape.iter().sum();
    let mut numer = 1u128;
    for k in 1..=n {
        numer *= k as u128;
    }
    let mut denom = 1u128;
    for (i, &row) in shape.iter().enumerate() {
        for j in 0..row {
            let arm = row - j - 1;
            let leg = shape.iter().skip(i + 1).filter(|&&r| r > j).count();
            denom *= (arm + leg + 1) as u128;
        }
    }
    (numer / denom) as u64
}

fn catalan(m: u32) -> u64 {
    // C_m = (2m)! / (m! (m+1)!)
    let mut c = 1u64;
    for i in 0..m as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// Sato–Tate cumulative distribution on `[-2, 2]`; evaluated from a
/// numerically integrated grid so that every scalar reference measure
/// goes through the same evaluator.
pub struct SatoTateCdf {
    grid: Vec<f64>,
}

impl SatoTateCdf {
    pub fn new() -> SatoTateCdf {
        SatoTateCdf { grid: cdf_grid(|t| (1.0 - t * t / 4.0).max(0.0).sqrt() / std::f64::consts::PI, -2.0, 2.0, 10_000) }
    }

    pub fn eval(&self, t: f64) -> f64 {
        grid_eval(&self.grid, -2.0, 2.0, t)
    }
}

impl Default for SatoTateCdf {
    fn default() -> Self {
        Self::new()
    }
}

/// Trapezoid-integrated CDF grid of a density on `[lo, hi]`, normalized
/// to end at exactly 1.
fn cdf_grid(density: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let h = (hi - lo) / points as f64;
    let mut grid = Vec::with_capacity(points + 1);
    let mut acc = 0.0;
    grid.push(0.0);
    let mut prev = density(lo);
    for i in 1..=points {
        let x = lo + h * i as f64;
        let cur = density(x);
        acc += 0.5 * (prev + cur) * h;
        grid.push(acc);
        prev = cur;
    }
    let total = *grid.last().unwrap();
    for g in grid.iter_mut() {
        *g /= total;
    }
    grid
}

fn grid_eval(grid: &[f64], lo: f64, hi: f64, t: f64) -> f64 {
    if t <= lo {
        return 0.0;
    }
    if t >= hi {
        return 1.0;
    }
    let pos = (t - lo) / (hi - lo) * (grid.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    grid[i] * (1.0 - frac) + grid[(i + 1).min(grid.len() - 1)] * frac
}

/// Kolmogorov–Smirnov distance of a sample against a reference CDF.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!sample.is_empty());
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// A sample of complex traces (or full eigenvalue data) from some
/// family of unitary classes.
#[derive(Clone, Debug)]
pub struct EmpiricalSample {
    pub traces: Vec<C64>,
    pub source: String,
    pub seed: Option<u64>,
}

impl EmpiricalSample {
    pub fn from_traces(traces: Vec<C64>, source: &str) -> EmpiricalSample {
        assert!(traces.iter().all(|t| t.re.is_finite() && t.im.is_finite()), "NaN in sample");
        EmpiricalSample { traces, source: source.to_string(), seed: None }
    }

    pub fn abs_moment(&self, two_m: u32) -> f64 {
        assert!(two_m % 2 == 0);
        let m = two_m / 2;
        self.traces.iter().map(|t| t.norm_sqr().powi(m as i32)).sum::<f64>()
            / self.traces.len() as f64
    }
}

/// Haar sampling of the compact classical groups by orthonormalization
/// of Gaussian matrices with the standard phase (or sign) correction;
/// deterministic under the seed.
pub struct HaarSampler {
    rng: ChaCha8Rng,
}

impl HaarSampler {
    pub fn new(seed: u64) -> HaarSampler {
        HaarSampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Derives an independent per-chunk sampler (splitmix-style) so
    /// parallel chunks stay deterministic under the master seed.
    pub fn chunk(master_seed: u64, chunk: u64) -> HaarSampler {
        let mut z = master_seed.wrapping_add(chunk.wrapping_mul(0x9e3779b97f4a7c15));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        HaarSampler::new(z ^ (z >> 31))
    }

    fn gauss(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// One Haar-distributed `U(r)` matrix (row-major).
    pub fn unitary(&mut self, r: usize) -> Vec<Vec<C64>> {
        let mut a: Vec<Vec<C64>> = (0..r)
            .map(|_| (0..r).map(|_| C64::new(self.gauss(), self.gauss())).collect())
            .collect();
        // modified Gram-Schmidt on columns
        for j in 0..r {
            for i in 0..j {
                let inner: C64 = (0..r).map(|k| a[k][i].conj() * a[k][j]).sum();
                for k in 0..r {
                    let s = a[k][i];
                    a[k][j] -= inner * s;
                }
            }
            let norm: f64 = (0..r).map(|k| a[k][j].norm_sqr()).sum::<f64>().sqrt();
            // phase fix: make the "R" diagonal real positive
            for k in 0..r {
                a[k][j] /= norm;
            }
        }
        a
    }

    /// One Haar `USp(2r)` matrix via quaternionic Gram-Schmidt: columns
    /// of quaternions represented as 2x2 complex blocks
    /// `[[z, w], [-conj(w), conj(z)]]`.
    pub fn unitary_symplectic(&mut self, r: usize) -> Vec<Vec<C64>> {
        // quaternion entries as pairs (z, w)
        let mut q: Vec<Vec<(C64, C64)>> = (0..r)
            .map(|_| {
                (0..r)
                    .map(|_| {
                        (
                            C64::new(self.gauss(), self.gauss()),
                            C64::new(self.gauss(), self.gauss()),
                        )
                    })
                    .collect()
            })
            .collect();
        // quaternion helpers on (z, w) ~ z + w j
        let qconj = |a: (C64, C64)| (a.0.conj(), -a.1);
        let qmul = |a: (C64, C64), b: (C64, C64)| {
            (a.0 * b.0 - a.1 * b.1.conj(), a.0 * b.1 + a.1 * b.0.conj())
        };
        let qadd = |a: (C64, C64), b: (C64, C64)| (a.0 + b.0, a.1 + b.1);
        let qscale = |a: (C64, C64), s: f64| (a.0 * s, a.1 * s);
        let qnorm_sqr = |a: (C64, C64)| a.0.norm_sqr() + a.1.norm_sqr();
        for j in 0..r {
            for i in 0..j {
                // inner = sum_k conj(q[k][i]) q[k][j]
                let mut inner = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for k in 0..r {
                    inner = qadd(inner, qmul(qconj(q[k][i]), q[k][j]));
                }
                for k in 0..r {
                    let s = qmul(q[k][i], inner);
                    q[k][j] = (q[k][j].0 - s.0, q[k][j].1 - s.1);
                }
            }
            let norm: f64 = (0..r).map(|k| qnorm_sqr(q[k][j])).sum::<f64>().sqrt();
            for k in 0..r {
                q[k][j] = qscale(q[k][j], 1.0 / norm);
            }
        }
        // expand to 2r x 2r complex
        let n = 2 * r;
        let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
        for i in 0..r {
            for j in 0..r {
                let (z, w) = q[i][j];
                m[2 * i][2 * j] = z;
                m[2 * i][2 * j + 1] = w;
                m[2 * i + 1][2 * j] = -w.conj();
                m[2 * i + 1][2 * j + 1] = z.conj();
            }
        }
        m
    }

    /// One Haar `SO(r)` matrix: real Gaussian + Gram-Schmidt, then a
    /// determinant sign fix on the last column.
    pub fn special_orthogonal(&mut self, r: usize) -> Vec<Vec<f64>> {
        let mut a: Vec<Vec<f64>> = (0..r).map(|_| (0..r).map(|_| self.gauss()).collect()).collect();
        for j in 0..r {
            for i in 0..j {
                let inner: f64 = (0..r).map(|k| a[k][i] * a[k][j]).sum();
                for k in 0..r {
                    let s = a[k][i];
                    a[k][j] -= inner * s;
                }
            }
            let norm: f64 = (0..r).map(|k| a[k][j] * a[k][j]).sum::<f64>().sqrt();
            for k in 0..r {
                a[k][j] /= norm;
            }
        }
        if det_real(&a) < 0.0 {
            for k in 0..r {
                a[k][r - 1] = -a[k][r - 1];
            }
        }
        a
    }

    /// Traces of `count` Haar samples of the family.
    pub fn sample_traces(
        &mut self,
        family: GroupFamily,
        rank: usize,
        count: usize,
    ) -> EmpiricalSample {
        let mut traces = Vec::with_capacity(count);
        match family {
            GroupFamily::Unitary => {
                for _ in 0..count {
                    let u = self.unitary(rank);
                    traces.push((0..rank).map(|i| u[i][i]).sum());
                }
            }
            GroupFamily::SpecialUnitary => {
                for _ in 0..count {
                    // U(r) sample with the determinant phase divided out
                    // uniformly over the r-th roots
                    let u = self.unitary(rank);
                    let det = det_complex(&u);
                    let phase = C64::from_polar(1.0, -det.arg() / rank as f64);
                    traces.push((0..rank).map(|i| u[i][i] * phase).sum());
                }
            }
            GroupFamily::UnitarySymplectic => {
                for _ in 0..count {
                    let m = self.unitary_symplectic(rank);
                    traces.push((0..2 * rank).map(|i| m[i][i]).sum());
                }
            }
            GroupFamily::SpecialOrthogonal => {
                for _ in 0..count {
                    let m = self.special_orthogonal(rank);
                    traces.push(C64::new((0..rank).map(|i| m[i][i]).sum(), 0.0));
                }
            }
        }
        EmpiricalSample { traces, source: format!("haar-{family:?}-{rank}"), seed: None }
    }

    /// `E |Tr(g^m)|^2` Monte-Carlo for `U(r)` (uses full matrices).
    pub fn power_trace_second_moment(&mut self, rank: usize, m: u32, count: usize) -> f64 {
        let mut acc = 0.0;
        for _ in 0..count {
            let u = self.unitary(rank);
            let mut pw = identity(rank);
            for _ in 0..m {
                pw = matmul(&pw, &u);
            }
            let tr: C64 = (0..rank).map(|i| pw[i][i]).sum();
            acc += tr.norm_sqr();
        }
        acc / count as f64
    }

    /// Unitarity check helper: max entry of `U* U - I`.
    pub fn unitarity_residual(u: &[Vec<C64>]) -> f64 {
        let r = u.len();
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in 0..r {
                let inner: C64 = (0..r).map(|k| u[k][i].conj() * u[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner - C64::new(want, 0.0)).norm());
            }
        }
        worst
    }
}

fn identity(r: usize) -> Vec<Vec<C64>> {
    (0..r)
        .map(|i| (0..r).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

fn matmul(a: &[Vec<C64>], b: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let r = a.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); r]; r];
    for i in 0..r {
        for k in 0..r {
            let aik = a[i][k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..r {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn det_complex(m: &[Vec<C64>]) -> C64 {
    let r = m.len();
    let mut a: Vec<Vec<C64>> = m.to_vec();
    let mut det = C64::new(1.0, 0.0);
    for c in 0..r {
        let piv = (c..r).max_by(|&i, &j| {
            a[i][c].norm().partial_cmp(&a[j][c].norm()).unwrap()
        });
        let piv = piv.unwrap();
        if a[piv][c].norm_sqr() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        let inv = C64::new(1.0, 0.0) / a[c][c];
        for i in (c + 1)..r {
            let f = a[i][c] * inv;
            for j in c..r {
                let s = a[c][j];
                a[i][j] -= f * s;
            }
        }
    }
    det
}

fn det_real(m: &[Vec<f64>]) -> f64 {
    let r = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0f64;
    for c in 0..r {
        let piv = (c..r).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
        if a[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        for i in (c + 1)..r {
            let f = a[i][c] / a[c][c];
            for j in c..r {
                a[i][j] -= f * a[c][j];
            }
        }
    }
    det
}

/// Moment/KS comparison report between an empirical sample and a
/// reference measure.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CompareReport {
    pub family: String,
    pub rank: u32,
    pub sample_size: usize,
    /// (order 2m, empirical, reference when supported, delta)
    pub abs_moments: Vec<(u32, f64, Option<f64>, Option<f64>)>,
    /// KS of the scalar pushforward against the family CDF, when one is
    /// wired up (the SU(2)/USp(2) trace).
    pub ks: Option<f64>,
    pub seed: Option<u64>,
}

/// Compares sample moments of orders 2, 4, 8 against the exact
/// references, plus KS for the Sato–Tate pushforward when applicable.
pub fn compare_stats(
    sample: &EmpiricalSample,
    family: GroupFamily,
    rank: u32,
) -> Result<CompareReport, RmtError> {
    if sample.traces.is_empty() {
        return Err(RmtError::EmptySample);
    }
    let mut abs_moments = Vec::new();
    for two_m in [2u32, 4, 8] {
        let emp = sample.abs_moment(two_m);
        let reference = reference_moment(family, rank, MomentKind::AbsTrace2m(two_m / 2)).ok();
        let delta = reference.map(|r| emp - r);
        abs_moments.push((two_m, emp, reference, delta));
    }
    let ks = if (family == GroupFamily::SpecialUnitary && rank == 2)
        || (family == GroupFamily::UnitarySymplectic && rank == 1)
    {
        let cdf = SatoTateCdf::new();
        let reals: Vec<f64> = sample.traces.iter().map(|t| t.re).collect();
        Some(ks_distance(&reals, |t| cdf.eval(t)))
    } else {
        None
    };
    Ok(CompareReport {
        family: format!("{family:?}"),
        rank,
        sample_size: sample.traces.len(),
        abs_moments,
        ks,
        seed: sample.seed,
    })
}
