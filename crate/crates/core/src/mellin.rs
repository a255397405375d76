//! Full-spectrum transforms `chi -> S(M, chi)`, Fourier inversion and
//! Plancherel checks, reconstruction of unitarized Frobenius conjugacy
//! classes from power sums, and Fourier `L`-functions with detection of
//! their rational form.
//!
//! The spectrum kernels work on a trace-value vector laid out in the flat
//! exponent order of an `AbelianGroupStructure`; the character sum is
//! then exactly a multi-axis DFT along the invariant factors.

use std::time::Instant;

use thiserror::Error;

use crate::fftutil;
use crate::C64;

#[derive(Debug, Error)]
pub enum MellinError {
    #[error("budget exceeded: {0} character-point products > {1}")]
    BudgetExceeded(u64, u64),
    #[error("spectrum length {got} does not match group order {want}")]
    IncompleteSpectrum { got: usize, want: usize },
    #[error("tower of depth {want} required, {got} available")]
    TowerUnavailable { want: usize, got: usize },
    #[error("no linear recurrence found within the truncation order")]
    NoRecurrenceWithinTruncation,
    #[error("rank {rank} exceeds the number of supplied power sums {supplied}")]
    NotEnoughPowerSums { rank: usize, supplied: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SpectrumMethod {
    Naive,
    Fft,
}

/// The full map `chi -> S(M, chi)` over the dual of one group of
/// rational points.
pub struct Spectrum {
    /// Invariant factors of the group (the dual has the same shape).
    pub dims: Vec<u64>,
    /// Values indexed by the character's flat exponent index.
    pub values: Vec<C64>,
    pub extension_degree: usize,
    pub descriptor_id: String,
    pub method: SpectrumMethod,
    pub wall_seconds: f64,
}

/// Default budget on character-point products for the naive method.
pub const NAIVE_BUDGET: u64 = 10_000_000;

/// Computes the spectrum from trace values in flat element order.
pub fn spectrum_from_values(
    dims: &[u64],
    trace_values: &[C64],
    extension_degree: usize,
    descriptor_id: &str,
    method: SpectrumMethod,
) -> Result<Spectrum, MellinError> {
    let order: u64 = dims.iter().product::<u64>().max(1);
    if trace_values.len() as u64 != order {
        return Err(MellinError::IncompleteSpectrum { got: trace_values.len(), want: order as usize });
    }
    let start = Instant::now();
    let values = match method {
        SpectrumMethod::Naive => {
            let products = order.saturating_mul(order);
            if products > NAIVE_BUDGET {
                return Err(MellinError::BudgetExceeded(products, NAIVE_BUDGET));
            }
            naive_dft(dims, trace_values)
        }
        SpectrumMethod::Fft => {
            let mut v = trace_values.to_vec();
            fftutil::dft_multi(&mut v, dims);
            v
        }
    };
    Ok(Spectrum {
        dims: dims.to_vec(),
        values,
        extension_degree,
        descriptor_id: descriptor_id.to_string(),
        method,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn naive_dft(dims: &[u64], data: &[C64]) -> Vec<C64> {
    let n = data.len();
    let unflatten = |mut t: usize| -> Vec<u64> {
        let mut v = vec![0u64; dims.len()];
        for (i, &d) in dims.iter().enumerate().rev() {
            v[i] = (t % d as usize) as u64;
            t /= d as usize;
        }
        v
    };
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (c, o) in out.iter_mut().enumerate() {
        let cv = unflatten(c);
        for (e, &t) in data.iter().enumerate() {
            if t.norm_sqr() == 0.0 {
                continue;
            }
            let ev = unflatten(e);
            let mut ang = 0.0f64;
            for ((&ci, &ei), &d) in cv.iter().zip(&ev).zip(dims) {
                ang += (ci as u128 * ei as u128 % d as u128) as f64 / d as f64;
            }
            *o += t * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * ang);
        }
    }
    out
}

impl Spectrum {
    pub fn group_order(&self) -> u64 {
        self.dims.iter().product::<u64>().max(1)
    }

    /// `sum_chi S(M, chi)`, which must equal `|G| t_M(e)` by
    /// orthogonality.
    pub fn orthogonality_sum(&self) -> C64 {
        self.values.iter().sum()
    }

    /// Fourier inversion: recovers the trace values pointwise,
    /// `t(x) = |G|^{-1} sum_chi S(chi) conj(chi(x))`.
    pub fn invert(&self) -> Vec<C64> {
        let mut v = self.values.clone();
        fftutil::idft_multi(&mut v, &self.dims);
        let scale = 1.0 / self.group_order() as f64;
        for a in v.iter_mut() {
            *a *= scale;
        }
        v
    }

    /// Both sides of the Plancherel identity:
    /// `(sum_x |t|^2, |G|^{-1} sum_chi |S|^2)` — the caller supplies the
    /// trace values so the two sides stay independently computed.
    pub fn plancherel_sides(&self, trace_values: &[C64]) -> (f64, f64) {
        let lhs: f64 = trace_values.iter().map(|t| t.norm_sqr()).sum();
        let rhs: f64 =
            self.values.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.group_order() as f64;
        (lhs, rhs)
    }
}

// ---- Newton identities and root finding --------------------------------

/// Elementary symmetric functions `e_1..e_r` from power sums `p_1..p_r`:
/// `m e_m = sum_{i=1..m} (-1)^{i-1} e_{m-i} p_i`.
pub fn newton_to_elementary(power_sums: &[C64], r: usize) -> Vec<C64> {
    assert!(power_sums.len() >= r, "need p_1..p_r");
    let mut e = vec![C64::new(0.0, 0.0); r + 1];
    e[0] = C64::new(1.0, 0.0);
    for m in 1..=r {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=m {
            let term = e[m - i] * power_sums[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e[m] = acc / m as f64;
    }
    e
}

/// Extends power sums past `r` using the recurrence
/// `p_n = sum_{i=1..r} (-1)^{i-1} e_i p_{n-i}`.
pub fn extend_power_sums(e: &[C64], p: &[C64], upto: usize) -> Vec<C64> {
    let r = e.len() - 1;
    let mut out = p.to_vec();
    while out.len() < upto {
        let n = out.len();
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=r {
            let term = e[i] * out[n - i];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        out.push(acc);
    }
    out
}

/// All roots of the monic polynomial `x^d + c[d-1] x^{d-1} + ... + c[0]`
/// by Durand–Kerner iteration with Newton polishing.
pub fn monic_roots(coeffs_low_to_high_without_lead: &[C64]) -> Vec<C64> {
    let d = coeffs_low_to_high_without_lead.len();
    if d == 0 {
        return Vec::new();
    }
    let c = coeffs_low_to_high_without_lead;
    let eval = |z: C64| -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for i in (0..d).rev() {
            acc = acc * z + c[i];
        }
        acc
    };
    let eval_deriv = |z: C64| -> C64 {
        // derivative of monic poly
        let mut acc = C64::new(d as f64, 0.0);
        for i in (1..d).rev() {
            acc = acc * z + c[i] * i as f64;
        }
        acc
    };
    // initial guesses: scaled roots of unity off the real axis
    let radius = 1.0
        + c.iter().map(|v| v.norm()).fold(0.0f64, f64::max).powf(1.0 / d as f64).max(0.5);
    let mut z: Vec<C64> = (0..d)
        .map(|i| C64::from_polar(radius * 0.7, 2.0 * std::f64::consts::PI * (i as f64 + 0.35) / d as f64 + 0.4))
        .collect();
    for _ in 0..300 {
        let mut delta_max = 0.0f64;
        for i in 0..d {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..d {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm_sqr() == 0.0 {
                // perturb coincident guesses
                z[i] += C64::new(1e-6, 1e-6);
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta_max = delta_max.max(step.norm());
        }
        if delta_max < 1e-14 {
            break;
        }
    }
    // Newton polish
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let dv = eval_deriv(*zi);
            if dv.norm_sqr() > 0.0 {
                *zi -= eval(*zi) / dv;
            }
        }
    }
    z.sort_by(|a, b| {
        a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())
    });
    z
}

/// A rank-`r` unitary conjugacy class reconstructed from power sums.
#[derive(Clone, Debug, serde::Serialize)]
pub struct FrobeniusClass {
    pub rank: usize,
    /// Coefficients of `det(1 - T Theta)`, constant term first (always 1).
    pub char_poly: Vec<(f64, f64)>,
    /// Unimodular eigenvalue multiset.
    pub eigenvalues: Vec<(f64, f64)>,
    /// `max | |lambda_i| - 1 |`.
    pub unimodularity_residual: f64,
    /// Max deviation between predicted and measured `Tr(Theta^n)` for
    /// `r < n <= depth` (full mode), or the self-consistency residual of
    /// the unitary completion (completion mode).
    pub newton_residual: f64,
    /// Max error when re-expanding the characteristic polynomial from
    /// the located eigenvalues.
    pub reconstruction_residual: f64,
    /// Whether either residual gate failed (default tolerance 1e-3).
    pub ramified_suspect: bool,
    /// "full" (power sums through depth >= r) or "unitary-completion".
    pub method: &'static str,
    /// Trace of the class: the degree-1 power sum exactly as supplied.
    pub trace: (f64, f64),
}

pub const RESIDUAL_TOLERANCE: f64 = 1e-3;

impl FrobeniusClass {
    /// Full reconstruction: Newton identities on `p_1..p_r`, roots by
    /// iteration, consistency checked against the measured
    /// `p_{r+1}..p_depth`.
    pub fn from_power_sums(power_sums: &[C64], r: usize, tol: f64) -> Result<FrobeniusClass, MellinError> {
        if power_sums.len() < r {
            return Err(MellinError::NotEnoughPowerSums { rank: r, supplied: power_sums.len() });
        }
        let e = newton_to_elementary(power_sums, r);
        let depth = power_sums.len();
        // predicted extension vs measured
        let predicted = extend_power_sums(&e, &power_sums[..r], depth);
        let mut newton_residual = 0.0f64;
        for n in r..depth {
            newton_residual = newton_residual.max((predicted[n] - power_sums[n]).norm());
        }
        Ok(Self::finish(e, power_sums, r, newton_residual, tol, "full"))
    }

    /// Reconstruction from `p_1..p_m` with `m >= floor(r/2) + 1`, using
    /// unitarity to complete the characteristic polynomial:
    /// `e_{r-j} = det(Theta) conj(e_j)`.  The overlap between computed
    /// and completed coefficients becomes the consistency residual.
    pub fn from_power_sums_unitary_completion(
        power_sums: &[C64],
        r: usize,
        tol: f64,
    ) -> Result<FrobeniusClass, MellinError> {
        let m = power_sums.len().min(r);
        if m < r / 2 + 1 {
            return Err(MellinError::NotEnoughPowerSums { rank: r / 2 + 1, supplied: m });
        }
        if m == r {
            return Self::from_power_sums(power_sums, r, tol);
        }
        let e_low = newton_to_elementary(&power_sums[..m], m);
        // det = e_r = e_{r-j} / conj(e_j): choose the stablest pivot j
        // with r - j <= m and j <= m
        let mut best: Option<(usize, f64)> = None;
        for j in (r - m)..=m {
            if r - j > m {
                continue;
            }
            let score = e_low[j].norm().min(e_low[r - j].norm());
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let (j0, _) = best.ok_or(MellinError::NotEnoughPowerSums { rank: r, supplied: m })?;
        let det = e_low[r - j0] / e_low[j0].conj();
        let mut e = vec![C64::new(0.0, 0.0); r + 1];
        e[..=m].copy_from_slice(&e_low);
        for j in 0..(r - m) {
            e[r - j] = det * e_low[j].conj();
        }
        // consistency: indices where both routes give a value
        let mut completion_residual = (det.norm() - 1.0).abs();
        for j in (r - m)..=m {
            if r - j <= m {
                let predicted = det * e_low[j].conj();
                completion_residual = completion_residual.max((predicted - e_low[r - j]).norm());
            }
        }
        Ok(Self::finish(e, power_sums, r, completion_residual, tol, "unitary-completion"))
    }

    fn finish(
        e: Vec<C64>,
        power_sums: &[C64],
        r: usize,
        newton_residual: f64,
        tol: f64,
        method: &'static str,
    ) -> FrobeniusClass {
        // det(1 - T Theta) = sum_j (-1)^j e_j T^j; eigenvalues are the
        // roots of the reversed polynomial sum_j (-1)^j e_j x^{r-j}
        let mut char_poly = Vec::with_capacity(r + 1);
        for (j, ej) in e.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            char_poly.push(sign * ej);
        }
        // monic in x: x^r - e_1 x^{r-1} + e_2 x^{r-2} ... => low-to-high
        let mut monic = vec![C64::new(0.0, 0.0); r];
        for j in 1..=r {
            monic[r - j] = char_poly[j];
        }
        let eigenvalues = monic_roots(&monic);
        let unimodularity_residual =
            eigenvalues.iter().map(|l| (l.norm() - 1.0).abs()).fold(0.0f64, f64::max);
        // re-expand char poly from roots
        let mut re = vec![C64::new(1.0, 0.0)];
        for l in &eigenvalues {
            let mut next = vec![C64::new(0.0, 0.0); re.len() + 1];
            for (i, &c) in re.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * l;
            }
            re = next;
        }
        let reconstruction_residual = re
            .iter()
            .zip(&char_poly)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        let trace = power_sums.first().copied().unwrap_or_else(|| C64::new(0.0, 0.0));
        FrobeniusClass {
            rank: r,
            char_poly: char_poly.iter().map(|c| (c.re, c.im)).collect(),
            eigenvalues: eigenvalues.iter().map(|c| (c.re, c.im)).collect(),
            unimodularity_residual,
            newton_residual,
            reconstruction_residual,
            ramified_suspect: unimodularity_residual > tol || newton_residual > tol,
            method,
            trace: (trace.re, trace.im),
        }
    }

    pub fn det(&self) -> C64 {
        // det(Theta) = e_r = (-1)^r * char_poly[r]
        let (re, im) = self.char_poly[self.rank];
        let c = C64::new(re, im);
        if self.rank % 2 == 0 {
            c
        } else {
            -c
        }
    }

    pub fn trace_c(&self) -> C64 {
        C64::new(self.trace.0, self.trace.1)
    }

    /// `Tr(Theta^m)` from the eigenvalue multiset.
    pub fn power_trace(&self, m: u64) -> C64 {
        self.eigenvalues
            .iter()
            .map(|&(re, im)| C64::new(re, im).powu(m as u32))
            .sum()
    }
}

/// Diagnostic rank estimation: smallest trial rank whose Newton-extension
/// residual over the remaining depth drops below tolerance.
pub fn estimate_rank(power_sums: &[C64], max_rank: usize, tol: f64) -> Option<usize> {
    for r in 1..=max_rank.min(power_sums.len().saturating_sub(1)) {
        let e = newton_to_elementary(power_sums, r);
        let predicted = extend_power_sums(&e, &power_sums[..r], power_sums.len());
        let resid = (r..power_sums.len())
            .map(|n| (predicted[n] - power_sums[n]).norm())
            .fold(0.0f64, f64::max);
        if resid < tol {
            return Some(r);
        }
    }
    None
}

// ---- L-hat series -------------------------------------------------------

/// Truncated Fourier `L`-function data: the exponentiated series of
/// `sum b_n T^n / n`, its detected rational form, and the Weil-number
/// classification of zeros and poles.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LhatSeries {
    /// The log-derivative inputs `b_n = |G(k_n)| t_M(e; k_n)`.
    pub b: Vec<(f64, f64)>,
    /// Coefficients of the exponentiated series through the truncation.
    pub coeffs: Vec<(f64, f64)>,
    /// Detected rational form (numerator, denominator; low to high), or
    /// empty when no recurrence was found within the truncation.
    pub numerator: Vec<(f64, f64)>,
    pub denominator: Vec<(f64, f64)>,
    pub recurrence_found: bool,
    /// Zeros and poles as `(value re, value im, weight)`, with the Weil
    /// weight `w` such that `|1/root| = q^{w/2}` within tolerance, when
    /// one exists.
    pub zeros: Vec<(f64, f64, Option<i32>)>,
    pub poles: Vec<(f64, f64, Option<i32>)>,
}

/// Builds the truncated `L`-series from `b_1..b_N`, finds the minimal
/// linear recurrence of its coefficients by Berlekamp–Massey, and
/// classifies zeros/poles as `q`-Weil numbers.
pub fn lhat_series(b: &[C64], q: u64, weil_tol: f64) -> LhatSeries {
    let n = b.len();
    // exp: c_0 = 1, m c_m = sum_{j=1..m} b_j c_{m-j}
    let mut c = vec![C64::new(1.0, 0.0)];
    for m in 1..=n {
        let mut acc = C64::new(0.0, 0.0);
        for j in 1..=m {
            acc += b[j - 1] * c[m - j];
        }
        c.push(acc / m as f64);
    }
    // exp/log round trip must hold to 1e-9 through the truncation
    debug_assert!({
        let mut back = vec![C64::new(0.0, 0.0); n + 1];
        for m in 1..=n {
            let mut acc = c[m] * m as f64;
            for j in 1..m {
                acc -= back[j] * c[m - j];
            }
            back[m] = acc;
        }
        let scale = b.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
        b.iter().zip(&back[1..]).all(|(x, y)| (x - y).norm() < 1e-9 * scale)
    });

    // balance the coefficient magnitudes geometrically before the
    // synthesis: c_m spans many orders of magnitude when the dominant
    // pole sits at 1/q
    let rho = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, v)| v.norm().powf(1.0 / m as f64))
        .fold(1.0f64, f64::max);
    let scaled: Vec<C64> = c.iter().enumerate().map(|(m, v)| v / rho.powi(m as i32)).collect();
    let den_scaled = berlekamp_massey(&scaled, 1e-9);
    let (mut num, mut recurrence_found) = (Vec::new(), false);
    {
        // numerator = den * c in the scaled domain, truncated where the
        // tail vanishes
        let mut prod = vec![C64::new(0.0, 0.0); n + 1];
        for (i, &di) in den_scaled.iter().enumerate() {
            if di.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &cj) in scaled.iter().enumerate() {
                if i + j <= n {
                    prod[i + j] += di * cj;
                }
            }
        }
        let cut = prod.iter().rposition(|v| v.norm() > 1e-7).map(|i| i + 1).unwrap_or(1);
        // the vanishing tail must be long enough to witness the
        // recurrence within the truncation
        if cut + den_scaled.len() <= n + 1 {
            num = prod[..cut]
                .iter()
                .enumerate()
                .map(|(j, v)| v * rho.powi(j as i32))
                .collect();
            recurrence_found = true;
        }
    }
    let den: Vec<C64> = den_scaled
        .iter()
        .enumerate()
        .map(|(j, v)| v * rho.powi(j as i32))
        .collect();

    let classify = |roots: &[C64]| -> Vec<(f64, f64, Option<i32>)> {
        roots
            .iter()
            .map(|root| {
                let alpha = 1.0 / root.norm();
                let w = 2.0 * alpha.ln() / (q as f64).ln();
                let wr = w.round();
                let ok = (alpha - (q as f64).powf(wr / 2.0)).abs() <= weil_tol * alpha.max(1.0);
                (root.re, root.im, ok.then_some(wr as i32))
            })
            .collect()
    };
    let (zeros, poles) = if recurrence_found {
        (classify(&poly_roots(&num)), classify(&poly_roots(&den)))
    } else {
        (Vec::new(), Vec::new())
    };

    LhatSeries {
        b: b.iter().map(|v| (v.re, v.im)).collect(),
        coeffs: c.iter().map(|v| (v.re, v.im)).collect(),
        numerator: num.iter().map(|v| (v.re, v.im)).collect(),
        denominator: den.iter().map(|v| (v.re, v.im)).collect(),
        recurrence_found,
        zeros,
        poles,
    }
}

fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    // roots of an arbitrary polynomial: normalize to monic
    let mut c = coeffs.to_vec();
    while c.last().map_or(false, |v| v.norm() < 1e-12) {
        c.pop();
    }
    if c.len() <= 1 {
        return Vec::new();
    }
    let lead = *c.last().unwrap();
    let monic: Vec<C64> = c[..c.len() - 1].iter().map(|v| v / lead).collect();
    monic_roots(&monic)
}

/// Berlekamp–Massey over the complex numbers with a vanishing tolerance:
/// returns the minimal connection polynomial `1 + d_1 T + ... + d_L T^L`
/// such that `sum_j d_j c_{m-j} ~ 0` for `m >= L`.
///
/// The tolerance is absolute; callers should balance the sequence
/// magnitudes first (see `lhat_series`).
pub fn berlekamp_massey(seq: &[C64], tol: f64) -> Vec<C64> {
    let n = seq.len();
    let mut c = vec![C64::new(1.0, 0.0)];
    let mut b = vec![C64::new(1.0, 0.0)];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut last_delta = C64::new(1.0, 0.0);
    for i in 0..n {
        let mut delta = seq[i];
        for j in 1..c.len().min(i + 1) {
            delta += c[j] * seq[i - j];
        }
        if delta.norm() <= tol {
            m += 1;
        } else if 2 * l <= i {
            let t = c.clone();
            let factor = delta / last_delta;
            if c.len() < b.len() + m {
                c.resize(b.len() + m, C64::new(0.0, 0.0));
            }
            for (j, &bj) in b.iter().enumerate() {
                c[j + m] -= factor * bj;
            }
            l = i + 1 - l;
            b = t;
            last_delta = delta;
            m = 1;
        } else {
            let factor = delta / last_delta;
            if c.len() < b.len() + m {
                c.resize(b.len() + m, C64::new(0.0, 0.0));
            }
            for (j, &bj) in b.iter().enumerate() {
                c[j + m] -= factor * bj;
            }
            m += 1;
        }
    }
    c.truncate(l + 1);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_spectrum_is_flat() {
        // S(delta_e, chi) = 1 for all chi
        let dims = vec![4u64, 5];
        let mut t = vec![C64::new(0.0, 0.0); 20];
        t[0] = C64::new(1.0, 0.0);
        let s = spectrum_from_values(&dims, &t, 1, "pm", SpectrumMethod::Fft).unwrap();
        for v in &s.values {
            assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // point mass away from e: |S| = 1, S(chi) = chi(x0)
        let mut t2 = vec![C64::new(0.0, 0.0); 20];
        t2[7] = C64::new(1.0, 0.0);
        let s2 = spectrum_from_values(&dims, &t2, 1, "pm", SpectrumMethod::Fft).unwrap();
        for v in &s2.values {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn naive_and_fft_agree() {
        let dims = vec![3u64, 8];
        let t: Vec<C64> = (0..24)
            .map(|i| C64::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let a = spectrum_from_values(&dims, &t, 1, "x", SpectrumMethod::Naive).unwrap();
        let b = spectrum_from_values(&dims, &t, 1, "x", SpectrumMethod::Fft).unwrap();
        let scale: f64 = a.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-8 * scale);
        }
    }

    #[test]
    fn inversion_roundtrip_and_plancherel() {
        let dims = vec![7u64, 2, 2];
        let t: Vec<C64> = (0..28)
            .map(|i| C64::new(((i * i) % 11) as f64 / 11.0, (i % 5) as f64 / 5.0))
            .collect();
        let s = spectrum_from_values(&dims, &t, 1, "x", SpectrumMethod::Fft).unwrap();
        let back = s.invert();
        for (x, y) in t.iter().zip(&back) {
            assert!((x - y).norm() < 1e-9);
        }
        let (lhs, rhs) = s.plancherel_sides(&t);
        assert!((lhs - rhs).abs() < 1e-9 * lhs.max(1.0));
    }

    #[test]
    fn newton_roundtrip_on_known_roots() {
        // roots on the unit circle
        let roots: Vec<C64> =
            [0.3f64, 1.1, 2.7, 4.0].iter().map(|&a| C64::from_polar(1.0, a)).collect();
        let p: Vec<C64> = (1..=6)
            .map(|n| roots.iter().map(|r| r.powu(n)).sum())
            .collect();
        let fc = FrobeniusClass::from_power_sums(&p, 4, 1e-3).unwrap();
        assert!(fc.unimodularity_residual < 1e-9);
        assert!(fc.newton_residual < 1e-9);
        assert!(fc.reconstruction_residual < 1e-6);
        assert!(!fc.ramified_suspect);
        // eigenvalues match the input roots as multisets
        let mut got: Vec<(f64, f64)> = fc.eigenvalues.clone();
        let mut want: Vec<(f64, f64)> = roots.iter().map(|r| (r.re, r.im)).collect();
        let key = |a: &(f64, f64)| (a.0 * 1e6).round() as i64;
        got.sort_by_key(key);
        want.sort_by_key(key);
        for (g, w) in got.iter().zip(&want) {
            assert!((g.0 - w.0).abs() + (g.1 - w.1).abs() < 1e-6);
        }
        assert_eq!(fc.method, "full");
    }

    #[test]
    fn rank_one_class_is_the_value_itself() {
        let theta = C64::from_polar(1.0, 0.9);
        let p: Vec<C64> = (1..=3).map(|n| theta.powu(n)).collect();
        let fc = FrobeniusClass::from_power_sums(&p, 1, 1e-3).unwrap();
        assert!((fc.trace_c() - theta).norm() < 1e-15);
        assert!((fc.det() - theta).norm() < 1e-9);
        assert!(!fc.ramified_suspect);
    }

    #[test]
    fn non_unitary_input_is_flagged() {
        let roots = [C64::new(1.5, 0.0), C64::new(0.5, 0.2)];
        let p: Vec<C64> = (1..=4)
            .map(|n| roots.iter().map(|r| r.powu(n)).sum())
            .collect();
        let fc = FrobeniusClass::from_power_sums(&p, 2, 1e-3).unwrap();
        assert!(fc.ramified_suspect);
        assert!(fc.unimodularity_residual > 0.1);
    }

    #[test]
    fn unitary_completion_matches_full() {
        // r = 6 class, only p_1..p_4 supplied
        let roots: Vec<C64> = [0.2f64, 0.9, 1.7, 2.9, 4.1, 5.3]
            .iter()
            .map(|&a| C64::from_polar(1.0, a))
            .collect();
        let p_full: Vec<C64> = (1..=8)
            .map(|n| roots.iter().map(|r| r.powu(n)).sum())
            .collect();
        let full = FrobeniusClass::from_power_sums(&p_full, 6, 1e-3).unwrap();
        let partial =
            FrobeniusClass::from_power_sums_unitary_completion(&p_full[..4], 6, 1e-3).unwrap();
        assert_eq!(partial.method, "unitary-completion");
        assert!(partial.newton_residual < 1e-8, "self-consistency of completion");
        for (a, b) in full.char_poly.iter().zip(&partial.char_poly) {
            assert!((a.0 - b.0).abs() + (a.1 - b.1).abs() < 1e-7);
        }
        assert!((partial.det().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn estimate_rank_recovers_true_rank() {
        let roots: Vec<C64> =
            [0.5f64, 1.3, 2.2].iter().map(|&a| C64::from_polar(1.0, a)).collect();
        let p: Vec<C64> = (1..=8)
            .map(|n| roots.iter().map(|r| r.powu(n)).sum())
            .collect();
        assert_eq!(estimate_rank(&p, 6, 1e-6), Some(3));
    }

    #[test]
    fn lhat_gm_point_mass_identity() {
        // G = G_m, M = delta_e: b_n = q^n - 1, L-hat = (1-T)/(1-qT)
        let q = 7u64;
        let b: Vec<C64> = (1..=12)
            .map(|n| C64::new((q as f64).powi(n) - 1.0, 0.0))
            .collect();
        let s = lhat_series(&b, q, 1e-6);
        assert!(s.recurrence_found);
        // denominator 1 - qT (up to normalization), numerator 1 - T
        let den: Vec<C64> = s.denominator.iter().map(|&(r, i)| C64::new(r, i)).collect();
        let num: Vec<C64> = s.numerator.iter().map(|&(r, i)| C64::new(r, i)).collect();
        let d0 = den[0];
        assert!((den[1] / d0 + C64::new(q as f64, 0.0)).norm() < 1e-8);
        assert!((num[1] / num[0] + C64::new(1.0, 0.0)).norm() < 1e-8);
        // weights: zero at T=1 is weight-0 (|1/root| = 1 = q^0), pole at
        // 1/q has |1/root| = q = q^{2/2}: weight 2
        assert_eq!(s.zeros.len(), 1);
        assert_eq!(s.zeros[0].2, Some(0));
        assert_eq!(s.poles.len(), 1);
        assert_eq!(s.poles[0].2, Some(2));
    }

    #[test]
    fn lhat_ga_point_mass() {
        // G = G_a, M = delta_0: b_n = q^n, L-hat = 1/(1-qT)
        let q = 5u64;
        let b: Vec<C64> = (1..=12).map(|n| C64::new((q as f64).powi(n), 0.0)).collect();
        let s = lhat_series(&b, q, 1e-6);
        assert!(s.recurrence_found);
        assert_eq!(s.zeros.len(), 0);
        assert_eq!(s.poles.len(), 1);
    }

    #[test]
    fn lhat_zero_trace_gives_one() {
        let b = vec![C64::new(0.0, 0.0); 12];
        let s = lhat_series(&b, 5, 1e-6);
        assert!(s.recurrence_found);
        assert!(s.zeros.is_empty() && s.poles.is_empty());
        for (i, &(re, im)) in s.coeffs.iter().enumerate() {
            let want = if i == 0 { 1.0 } else { 0.0 };
            assert!((re - want).abs() + im.abs() < 1e-12);
        }
    }

    #[test]
    fn berlekamp_massey_fibonacci() {
        let mut seq = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        for i in 2..16 {
            let v = seq[i - 1] + seq[i - 2];
            seq.push(v);
        }
        let c = berlekamp_massey(&seq, 1e-9);
        // connection polynomial 1 - T - T^2
        assert_eq!(c.len(), 3);
        assert!((c[1] + C64::new(1.0, 0.0)).norm() < 1e-9);
        assert!((c[2] + C64::new(1.0, 0.0)).norm() < 1e-9);
    }
}
