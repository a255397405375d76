//! Benchmark-only crate; the measured kernels live in `mf-core`.
