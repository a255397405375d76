//! Finite field towers `F_p ⊂ F_{p^n}` with trace, norm, generators,
//! discrete logarithms, and univariate polynomial factorization.
//!
//! Elements of `F_{p^n}` are stored as packed base-`p` integers: the
//! element `c_0 + c_1 x + ... + c_{n-1} x^{n-1}` (mod the context's
//! irreducible modulus) is the index `sum c_i p^i`.  Packing keeps bulk
//! kernels on plain integer arrays and makes the additive group layout
//! coincide with the multi-dimensional FFT layout used elsewhere.
//!
//! Multiplication goes through exp/log tables once the field is small
//! enough (`p^n <= dlog_table_limit`, default `2^24`) and falls back to
//! schoolbook reduction plus baby-step/giant-step discrete logs above
//! that.

pub(crate) mod ctx;
mod factor;
pub mod poly;

pub use ctx::{build_field, build_field_with, Embedding, FieldCtx, FieldElem, GfError, Tower};
pub use factor::{factor_monic, is_irreducible};
pub use poly::MonicPoly;

/// Default cutoff for full exp/log tables: fields up to this order get
/// tables; larger ones use baby-step/giant-step discrete logarithms.
pub const DEFAULT_DLOG_TABLE_LIMIT: u64 = 1 << 24;
