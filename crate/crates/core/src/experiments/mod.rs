//! Configuration-driven experiments: each `run_*` entry point consumes a
//! validated [`ExperimentConfig`], computes its statistics, and returns a
//! [`Report`] plus named CSV artifacts.
//!
//! The bulk kernels shared by the experiments live here:
//!
//! * a multiplicative-orbit walker for diagonal objects on
//!   `G_m x G_a` that buckets trace values by the norm-and-trace image
//!   in `G(k)`, so one pass over `G(k_n)` serves every character of the
//!   base at once;
//! * the analogous bucket kernels for the torus (through the
//!   characteristic-polynomial norm) and for Jacobians (through the
//!   divisor norm).

pub mod config;
pub mod report;

mod detratio;
mod frobclass;
mod jacobian;
mod kloosterman;
mod lhat_demo;
mod moments;
mod sidon;
mod variance;

pub use config::{ConfigError, ExperimentConfig};
pub use detratio::run_det_ratio;
pub use frobclass::{classes_to_json, run_frobclass};
pub use jacobian::run_jacobian_st;
pub use kloosterman::run_kloosterman_salie;
pub use lhat_demo::run_lhat_demo;
pub use moments::run_moment_sweep;
pub use report::{Csv, Measurement, Report};
pub use sidon::run_sidon_check;
pub use variance::run_variance;

use num_complex::Complex64;

use crate::fftutil;
use crate::gf::{FieldCtx, Tower};
use crate::tracefn::{GmInner, ObjectDescriptor, Variant};
use crate::C64;

/// Outputs of one experiment run: the report plus named CSV files.
pub struct RunOutput {
    pub report: Report,
    pub csv: Vec<(String, String)>,
}

/// Dispatches a parsed config to its experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, Box<dyn std::error::Error>> {
    match cfg.experiment.as_str() {
        "kloosterman_salie" => run_kloosterman_salie(cfg),
        "moment_sweep" => run_moment_sweep(cfg),
        "sidon" => run_sidon_check(cfg),
        "variance" => run_variance(cfg),
        "jacobian_st" => run_jacobian_st(cfg),
        "lhat" => run_lhat_demo(cfg),
        "det_ratio" => run_det_ratio(cfg),
        "frobclass" => run_frobclass(cfg),
        other => Err(format!("no runner for experiment `{other}`").into()),
    }
}

pub(crate) fn psi(p: u64, residue: u64) -> C64 {
    let theta = 2.0 * std::f64::consts::PI * (residue % p) as f64 / p as f64;
    Complex64::new(theta.cos(), theta.sin())
}

pub(crate) fn root_of_unity(num: u64, den: u64) -> C64 {
    let theta = 2.0 * std::f64::consts::PI * (num % den) as f64 / den as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// Per-character power sums of a diagonal object on `G_m x G_a` over the
/// prime base: `p_n(chi, a) = sum_{x in k_n^x} chi(N(x)) psi(a Tr(alpha
/// x)) t_inner(x) * norm`, for all base characters at once.
///
/// The flat character index is `c * p + a` with `c` the multiplicative
/// exponent (mod p-1) and `a` the additive parameter; that layout is the
/// multi-axis DFT of the `(p-1) x p` bucket array.
pub(crate) struct DiagonalPowerSums {
    /// `sums[n-1][flat]` = normalized power sum at level `n`.
    pub sums: Vec<Vec<C64>>,
}

pub(crate) fn diagonal_power_sums(
    desc: &ObjectDescriptor,
    tower: &Tower,
    depth: usize,
) -> DiagonalPowerSums {
    let p = tower.p();
    let (inner, alpha) = match &desc.variant {
        Variant::DeltaPush { inner, alpha } => (inner, *alpha),
        _ => panic!("diagonal kernel needs a DeltaPush descriptor"),
    };
    let base = tower.base();
    let mut sums = Vec::with_capacity(depth);
    for n in 1..=depth {
        let kn = tower.level(n);
        let q = kn.order();
        let order = q - 1;
        // dlog of N(generator) in the base field
        let ng = kn.norm_abs_raw(kn.generator().index());
        let s = base.dlog(base.elem(ng)).expect("norm of generator is nonzero");
        let mut buckets = vec![C64::new(0.0, 0.0); ((p - 1) * p) as usize];
        // walk x = g^j with running inverse
        let g = kn.generator().index();
        let ginv = kn.inv_raw(g);
        let mut x = 1u64;
        let mut xinv = 1u64;
        let mut nlog = 0u64;
        for _ in 0..order {
            let tr_ax = kn.trace_abs_raw(kn.scale_raw(x, alpha % p));
            let value = match inner {
                GmInner::KummerAs { eta_exp, g: gfun, f } => {
                    // fast paths: g = x (Kummer in x), f in {c/x, c*x, 0}
                    let mut v = if *eta_exp == 0 {
                        C64::new(1.0, 0.0)
                    } else if gfun.num == [0, 1] && gfun.den == [1] {
                        root_of_unity(eta_exp * nlog % (p - 1), p - 1)
                    } else {
                        // general g: evaluate through the field
                        match gfun.eval(kn, kn.elem(x)) {
                            Some(gx) if gx.index() != 0 => {
                                let l = base
                                    .dlog(base.elem(kn.norm_abs_raw(gx.index())))
                                    .expect("nonzero");
                                root_of_unity(eta_exp * l % (p - 1), p - 1)
                            }
                            _ => C64::new(0.0, 0.0),
                        }
                    };
                    if f.num == [1] && f.den == [0, 1] {
                        v *= psi(p, kn.trace_abs_raw(xinv));
                    } else if f.den == [1] && f.num.len() == 2 && f.num[0] == 0 {
                        v *= psi(p, kn.trace_abs_raw(kn.scale_raw(x, f.num[1])));
                    } else if !f.num.iter().all(|&c| c == 0) {
                        match f.eval(kn, kn.elem(x)) {
                            Some(fx) => v *= psi(p, kn.trace_abs(fx)),
                            None => v = C64::new(0.0, 0.0),
                        }
                    }
                    v
                }
                GmInner::Const { alpha_re, alpha_im } => {
                    C64::new(*alpha_re, *alpha_im).powu(n as u32)
                }
                _ => panic!("diagonal kernel supports Kummer-type and constant inners"),
            };
            let flat = (nlog * p + tr_ax) as usize;
            buckets[flat] += value;
            // advance
            x = kn.mul_raw(x, g);
            xinv = kn.mul_raw(xinv, ginv);
            nlog += s;
            if nlog >= p - 1 {
                nlog -= p - 1;
            }
        }
        fftutil::dft_multi(&mut buckets, &[p - 1, p]);
        let norm = desc.norm_factor(q);
        for b in buckets.iter_mut() {
            *b *= norm;
        }
        sums.push(buckets);
    }
    DiagonalPowerSums { sums }
}

/// Bucket a value vector over `k_n` (packed-index order) by the
/// norm-to-base of the torus embedding `x -> t - x`, returning per-flat
/// sums over the structure of `T(k)`.
pub(crate) fn torus_bucket_values(
    torus: &crate::torus::TorusCtx,
    base_level: &crate::torus::TorusLevel,
    kn: &FieldCtx,
    values: &[C64],
) -> Vec<C64> {
    let size = base_level.structure.order() as usize;
    let mut buckets = vec![C64::new(0.0, 0.0); size];
    for x in 0..kn.order() {
        let v = values[x as usize];
        if v.norm_sqr() == 0.0 {
            continue;
        }
        if let Some(handle) = torus.norm_of_embedded(kn, x) {
            if let Some(flat) = base_level.encode_unit(handle) {
                buckets[flat as usize] += v;
            }
        }
    }
    buckets
}

/// DFT of a bucket vector along the invariant factors of the structure:
/// turns per-class sums into per-character sums.
pub(crate) fn buckets_to_char_sums(
    structure: &crate::abgroup::AbelianGroupStructure,
    buckets: &[C64],
) -> Vec<C64> {
    let mut v = buckets.to_vec();
    fftutil::dft_multi(&mut v, structure.invariant_factors());
    v
}

/// Relative deviation of `sum_chi S(chi)` from `|G| t(e)` — the
/// orthogonality smoke test every experiment runs.  Normalized by the
/// total spectral mass so the zero-stalk case stays meaningful.
pub(crate) fn orthogonality_residual(char_sums: &[C64], group_order: u64, t_at_e: C64) -> f64 {
    let total: C64 = char_sums.iter().sum();
    let want = t_at_e * group_order as f64;
    let mass: f64 = char_sums.iter().map(|s| s.norm()).sum();
    (total - want).norm() / mass.max(want.norm()).max(1.0)
}

