//! Benchmarks of the bulk kernels: field arithmetic, spectra (naive vs
//! FFT), the Legendre fiber correlation, Cantor arithmetic, and unitary
//! class reconstruction.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use mf_core::curves::HyperellipticCurve;
use mf_core::gf::{build_field, Tower};
use mf_core::mellin::{spectrum_from_values, FrobeniusClass, SpectrumMethod};
use mf_core::tracefn::{kloosterman_bulk, legendre_counts};

fn field_ops(c: &mut Criterion) {
    let k = build_field(7, 5).unwrap(); // tables
    let k_big = mf_core::gf::build_field_with(7, 5, None, 2).unwrap(); // schoolbook
    let elems: Vec<_> = (1..1000u64).map(|i| i * 13 % k.order()).collect();
    c.bench_function("mul_table_f7_5", |b| {
        b.iter(|| {
            let mut acc = k.one();
            for &e in &elems {
                acc = k.mul(acc, k.elem(black_box(e.max(1))));
            }
            acc
        })
    });
    c.bench_function("mul_schoolbook_f7_5", |b| {
        b.iter(|| {
            let mut acc = k_big.one();
            for &e in &elems {
                acc = k_big.mul(acc, k_big.elem(black_box(e.max(1))));
            }
            acc
        })
    });
    c.bench_function("dlog_table_f7_5", |b| {
        b.iter(|| {
            let mut acc = 0u64;
            for &e in &elems {
                acc ^= k.dlog(k.elem(black_box(e.max(1)))).unwrap();
            }
            acc
        })
    });
}

fn spectra(c: &mut Criterion) {
    let dims = vec![30u64, 31];
    let values: Vec<Complex64> = (0..930)
        .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
        .collect();
    c.bench_function("spectrum_fft_930", |b| {
        b.iter(|| spectrum_from_values(&dims, black_box(&values), 1, "b", SpectrumMethod::Fft))
    });
    c.bench_function("spectrum_naive_930", |b| {
        b.iter(|| spectrum_from_values(&dims, black_box(&values), 1, "b", SpectrumMethod::Naive))
    });
}

fn trace_kernels(c: &mut Criterion) {
    let tower = Tower::new(7, 4).unwrap();
    let k4 = tower.level(4);
    c.bench_function("legendre_counts_f7_4", |b| b.iter(|| legendre_counts(black_box(k4))));
    c.bench_function("kloosterman_bulk_f7_4", |b| b.iter(|| kloosterman_bulk(black_box(k4), 2)));
}

fn cantor(c: &mut Criterion) {
    let k = build_field(11, 1).unwrap();
    let curve = HyperellipticCurve::new(k.clone(), vec![1, 0, 0, 0, 0, 1]).unwrap();
    let pts = curve.all_points(&k);
    let divisors: Vec<_> = pts.iter().map(|&p| curve.embed_point(&k, p).unwrap()).collect();
    c.bench_function("cantor_add_genus2_f11", |b| {
        b.iter(|| {
            let mut acc = divisors[1].clone();
            for d in &divisors {
                acc = curve.add(&k, &acc, black_box(d));
            }
            acc
        })
    });
}

fn reconstruction(c: &mut Criterion) {
    let roots: Vec<Complex64> = (0..8)
        .map(|i| Complex64::from_polar(1.0, 0.31 + 0.77 * i as f64))
        .collect();
    let p: Vec<Complex64> = (1..=10)
        .map(|n| roots.iter().map(|r| r.powu(n)).sum())
        .collect();
    c.bench_function("frobenius_class_rank8", |b| {
        b.iter(|| FrobeniusClass::from_power_sums(black_box(&p), 8, 1e-3))
    });
}

criterion_group!(benches, field_ops, spectra, trace_kernels, cantor, reconstruction);
criterion_main!(benches);
