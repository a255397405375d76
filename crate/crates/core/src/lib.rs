//! Discrete Fourier–Mellin transforms of trace functions on commutative
//! algebraic groups over finite fields.
//!
//! The library computes the full character-sum map `chi -> S(M, chi) =
//! sum_x t_M(x) chi(x)` for declaratively-described weight-zero trace
//! functions `t_M` on `G_a`, `G_m`, `G_m x G_a`, unit-group tori of etale
//! algebras `k[t]/f`, and Jacobians of hyperelliptic curves; reconstructs
//! the unitarized Frobenius conjugacy class attached to each character
//! from power sums over extension fields; and ships the named experiments
//! (Sato–Tate statistics, moment sweeps, Sidon checks, von Mangoldt
//! variance, L-function identities) behind the `mf` command-line tool.
//!
//! Layering, bottom to top:
//!
//! * [`gf`] — finite field towers `F_{p^n}` with trace, norm, discrete
//!   logs, and univariate factorization;
//! * [`abgroup`] — structure discovery for finite abelian black-box
//!   groups, their character groups, exact root-of-unity arithmetic;
//! * [`tracefn`] — trace-function descriptors and tannakian dimensions;
//! * [`mellin`] — spectra, Fourier inversion, Frobenius-class
//!   reconstruction, and Fourier `L`-functions;
//! * [`rmt`] — compact-group reference measures and Haar sampling;
//! * [`torus`], [`curves`] — the two nontrivial group geometries;
//! * [`experiments`] — configuration-driven experiment drivers.

pub mod abgroup;
pub mod curves;
pub mod experiments;
pub mod fftutil;
pub mod gf;
pub mod mellin;
pub mod rmt;
pub mod torus;
pub mod tracefn;

pub use gf::{FieldCtx, FieldElem, MonicPoly};




/// Complex scalar used throughout the statistics layers.
pub type C64 = num_complex::Complex64;
