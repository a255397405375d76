//! FFT helpers: cyclic DFTs of arbitrary length (via rustfft) and
//! multi-axis transforms over products of cyclic groups, which is what a
//! character sum over a finite abelian group amounts to.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward DFT with the character-sum sign convention used throughout:
/// `out[c] = sum_j in[j] e(+cj/n)`.
///
/// rustfft's forward transform uses `e(-cj/n)`, so this runs the inverse
/// (unnormalized) transform.
pub fn dft_cyclic(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(data.len());
    fft.process(data);
}

/// Inverse of [`dft_cyclic`], unnormalized: `out[j] = sum_c in[c]
/// e(-cj/n)`; divide by `n` to invert exactly.
pub fn idft_cyclic(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(data.len());
    fft.process(data);
}

/// DFT over a product of cyclic groups `Z/d_1 x ... x Z/d_k`, laid out
/// with the last factor contiguous (lexicographic flat index, matching
/// `AbelianGroupStructure::flatten`).  Sign convention `e(+<c,e>)`.
pub fn dft_multi(data: &mut [Complex64], dims: &[u64]) {
    let total: u64 = dims.iter().product();
    assert_eq!(data.len() as u64, total.max(1));
    let mut planner = FftPlanner::new();
    let mut stride: usize = 1;
    let mut scratch: Vec<Complex64> = Vec::new();
    for &d in dims.iter().rev() {
        let d = d as usize;
        let fft = planner.plan_fft_inverse(d);
        apply_axis(data, d, stride, &fft, &mut scratch, false);
        stride *= d;
    }
}

/// Inverse multi-axis transform, unnormalized (divide by the product of
/// the dimensions to invert exactly).
pub fn idft_multi(data: &mut [Complex64], dims: &[u64]) {
    let total: u64 = dims.iter().product();
    assert_eq!(data.len() as u64, total.max(1));
    let mut planner = FftPlanner::new();
    let mut stride: usize = 1;
    let mut scratch: Vec<Complex64> = Vec::new();
    for &d in dims.iter().rev() {
        let d = d as usize;
        let fft = planner.plan_fft_forward(d);
        apply_axis(data, d, stride, &fft, &mut scratch, true);
        stride *= d;
    }
}

fn apply_axis(
    data: &mut [Complex64],
    d: usize,
    stride: usize,
    fft: &Arc<dyn rustfft::Fft<f64>>,
    scratch: &mut Vec<Complex64>,
    inverse_kernel: bool,
) {
    let n = data.len();
    let block = d * stride;
    if d <= 16 {
        // dense d x d transform matrix; cheaper than per-slice FFT calls
        // for the short axes that dominate additive-group transforms
        let sign = if inverse_kernel { -1.0 } else { 1.0 };
        let mut w = vec![Complex64::new(0.0, 0.0); d * d];
        for c in 0..d {
            for j in 0..d {
                let ang = sign * 2.0 * std::f64::consts::PI * (c * j % d) as f64 / d as f64;
                w[c * d + j] = Complex64::new(ang.cos(), ang.sin());
            }
        }
        scratch.resize(d, Complex64::new(0.0, 0.0));
        for base in (0..n).step_by(block) {
            for off in 0..stride {
                for (j, s) in scratch.iter_mut().enumerate() {
                    *s = data[base + off + j * stride];
                }
                for c in 0..d {
                    let row = &w[c * d..(c + 1) * d];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, &s) in scratch.iter().enumerate() {
                        acc += row[j] * s;
                    }
                    data[base + off + c * stride] = acc;
                }
            }
        }
        return;
    }
    scratch.resize(d, Complex64::new(0.0, 0.0));
    for base in (0..n).step_by(block) {
        for off in 0..stride {
            for j in 0..d {
                scratch[j] = data[base + off + j * stride];
            }
            fft.process(scratch);
            for j in 0..d {
                data[base + off + j * stride] = scratch[j];
            }
        }
    }
}

/// Cyclic cross-correlation used by additive-group kernels:
/// `out[x] = sum_y f[y] g[y - x]` over `(Z/p)^m` (flat base-p layout).
pub fn additive_correlation(f: &[Complex64], g: &[Complex64], p: u64, m: usize) -> Vec<Complex64> {
    assert_eq!(f.len(), g.len());
    let dims = vec![p; m];
    let mut fa = f.to_vec();
    let mut ga = g.to_vec();
    // with D+ the e(+) kernel and D- the e(-) kernel:
    //   D+(out) = D+(f) . D-(g),  out = D-(D+(out)) / N
    dft_multi(&mut fa, &dims);
    idft_multi(&mut ga, &dims);
    for (a, b) in fa.iter_mut().zip(&ga) {
        *a *= b;
    }
    idft_multi(&mut fa, &dims);
    let scale = 1.0 / f.len() as f64;
    for a in fa.iter_mut() {
        *a *= scale;
    }
    fa
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_multi(data: &[Complex64], dims: &[u64]) -> Vec<Complex64> {
        let n = data.len();
        let unflatten = |mut t: usize| -> Vec<usize> {
            let mut v = vec![0usize; dims.len()];
            for (i, &d) in dims.iter().enumerate().rev() {
                v[i] = t % d as usize;
                t /= d as usize;
            }
            v
        };
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (c, o) in out.iter_mut().enumerate() {
            let cv = unflatten(c);
            for (j, &x) in data.iter().enumerate() {
                let jv = unflatten(j);
                let mut ang = 0.0f64;
                for ((&ci, &ji), &d) in cv.iter().zip(&jv).zip(dims) {
                    ang += (ci * ji) as f64 / d as f64;
                }
                let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ang);
                *o += x * w;
            }
        }
        out
    }

    #[test]
    fn multi_axis_matches_naive() {
        let dims = vec![3u64, 4, 5];
        let n: u64 = dims.iter().product();
        let mut data: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let expect = naive_dft_multi(&data, &dims);
        dft_multi(&mut data, &dims);
        for (a, b) in data.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn roundtrip_inverse() {
        let dims = vec![5u64, 5, 5];
        let n: u64 = dims.iter().product();
        let orig: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(i as f64, (i * i % 17) as f64)).collect();
        let mut data = orig.clone();
        dft_multi(&mut data, &dims);
        idft_multi(&mut data, &dims);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / n as f64 - b).norm() < 1e-9);
        }
    }

    #[test]
    fn correlation_matches_direct() {
        let (p, m) = (5u64, 2usize);
        let n = 25usize;
        let f: Vec<Complex64> = (0..n).map(|i| Complex64::new((i % 7) as f64, 0.0)).collect();
        let g: Vec<Complex64> = (0..n).map(|i| Complex64::new((i % 3) as f64, 1.0)).collect();
        let got = additive_correlation(&f, &g, p, m);
        // direct: out[x] = sum_y f[y] g[y-x] with digitwise subtraction
        let sub = |a: usize, b: usize| -> usize {
            let (mut a, mut b, mut out, mut mult) = (a, b, 0usize, 1usize);
            for _ in 0..m {
                let d = (a % 5 + 5 - b % 5) % 5;
                out += d * mult;
                a /= 5;
                b /= 5;
                mult *= 5;
            }
            out
        };
        for x in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..n {
                acc += f[y] * g[sub(y, x)];
            }
            assert!((acc - got[x]).norm() < 1e-9, "mismatch at {x}");
        }
    }
}
