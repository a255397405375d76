//! Univariate factorization over `F_q`: square-free decomposition,
//! distinct-degree splitting, and Cantor–Zassenhaus equal-degree
//! splitting with a fixed-seed generator so output is deterministic.

use super::ctx::FieldCtx;
use super::poly::{self, MonicPoly};

/// Irreducibility test for a monic polynomial over any `FieldCtx`.
pub fn is_irreducible(k: &FieldCtx, f: &MonicPoly) -> bool {
    let n = f.degree();
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let q = k.order();
    let fc = &f.coeffs;
    // x^{q^i} mod f
    let mut xq = poly::pow_mod_raw(k, &[0, 1], q as u128, fc);
    for i in 1..=n / 2 {
        if i > 1 {
            xq = pow_poly_q(k, &xq, fc);
        }
        let mut diff = xq.clone();
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = k.sub_raw(diff[1], 1);
        poly::trim(&mut diff);
        let g = poly::gcd_raw(k, fc.clone(), diff);
        if g.len() != 1 {
            return false;
        }
    }
    let mut xqn = xq;
    for _ in (n / 2)..n {
        xqn = pow_poly_q(k, &xqn, fc);
    }
    xqn == vec![0, 1]
}

fn pow_poly_q(k: &FieldCtx, a: &[u64], m: &[u64]) -> Vec<u64> {
    poly::pow_mod_raw(k, a, k.order() as u128, m)
}

/// Factors a monic polynomial of degree >= 1 into irreducible monic
/// factors with multiplicities.  Output is sorted by (degree, packed
/// coefficient vector), so re-runs are reproducible.
pub fn factor_monic(k: &FieldCtx, g: &MonicPoly) -> Vec<(MonicPoly, u32)> {
    assert!(g.degree() >= 1, "factor_monic needs degree >= 1");
    let mut out: Vec<(MonicPoly, u32)> = Vec::new();
    for (f, mult) in square_free_parts(k, &g.coeffs) {
        for irred in factor_square_free(k, &f) {
            out.push((MonicPoly { coeffs: irred }, mult));
        }
    }
    // merge duplicates (cannot arise from a correct sqf split, but keep
    // the output canonical regardless)
    out.sort_by(|a, b| {
        (a.0.degree(), &a.0.coeffs).cmp(&(b.0.degree(), &b.0.coeffs))
    });
    let mut merged: Vec<(MonicPoly, u32)> = Vec::new();
    for (f, m) in out {
        if let Some(last) = merged.last_mut() {
            if last.0 == f {
                last.1 += m;
                continue;
            }
        }
        merged.push((f, m));
    }
    debug_assert!(verify_factorization(k, g, &merged));
    merged
}

fn verify_factorization(k: &FieldCtx, g: &MonicPoly, factors: &[(MonicPoly, u32)]) -> bool {
    let mut prod = vec![1u64];
    for (f, m) in factors {
        if !is_irreducible(k, f) {
            return false;
        }
        for _ in 0..*m {
            prod = poly::mul_raw(k, &prod, &f.coeffs);
        }
    }
    prod == g.coeffs
}

/// Square-free decomposition: returns pairs `(f_i, i)` with
/// `g = prod f_i^i` and each `f_i` square-free (Yun's algorithm adapted
/// to characteristic p, peeling p-th powers).
fn square_free_parts(k: &FieldCtx, g: &[u64]) -> Vec<(Vec<u64>, u32)> {
    let p = k.p();
    let mut out: Vec<(Vec<u64>, u32)> = Vec::new();
    let mut stack: Vec<(Vec<u64>, u32)> = vec![(g.to_vec(), 1)];
    while let Some((f, outer_mult)) = stack.pop() {
        if f.len() <= 1 {
            continue;
        }
        let fp = derivative(k, &f);
        if fp.is_empty() {
            // f is a p-th power: f(x) = h(x^p); h inherits coefficients
            // at indices multiple of p, each taken to the p^{n-1} power
            // to undo Frobenius on coefficients
            let mut h = Vec::with_capacity((f.len() - 1) / p as usize + 1);
            let mut i = 0usize;
            while i < f.len() {
                // coefficient c with c = b^p: b = c^{q/p}
                let c = f[i];
                let b = k.pow_raw(c, (k.order() / p) as u128);
                h.push(b);
                i += p as usize;
            }
            stack.push((h, outer_mult * p as u32));
            continue;
        }
        let mut c = poly::gcd_raw(k, f.clone(), fp.clone());
        let mut w = poly::div_raw(k, &f, &c);
        let mut mult = 1u32;
        while w.len() > 1 {
            let y = poly::gcd_raw(k, w.clone(), c.clone());
            let part = poly::div_raw(k, &w, &y);
            if part.len() > 1 {
                out.push((part, outer_mult * mult));
            }
            w = y.clone();
            c = poly::div_raw(k, &c, &y);
            mult += 1;
        }
        if c.len() > 1 {
            stack.push((c, outer_mult));
        }
    }
    out
}

fn derivative(k: &FieldCtx, f: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(f.len().saturating_sub(1));
    for (i, &c) in f.iter().enumerate().skip(1) {
        out.push(k.scale_raw(c, (i as u64) % k.p()));
    }
    poly::trim(&mut out);
    out
}

/// Factors a square-free monic polynomial: distinct-degree first, then
/// equal-degree Cantor–Zassenhaus with a deterministic generator.
fn factor_square_free(k: &FieldCtx, f: &[u64]) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut rest = f.to_vec();
    let q = k.order() as u128;
    let mut d = 1usize;
    let mut xq = vec![0u64, 1];
    while rest.len() > 1 && d <= (rest.len() - 1) / 2 {
        xq = poly::pow_mod_raw(k, &xq, q, &rest);
        let mut diff = xq.clone();
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = k.sub_raw(diff[1], 1);
        poly::trim(&mut diff);
        let g = poly::gcd_raw(k, rest.clone(), diff);
        if g.len() > 1 {
            equal_degree_split(k, &g, d, &mut out);
            rest = poly::div_raw(k, &rest, &g);
            xq = poly::rem_raw(k, &xq, &rest);
        }
        d += 1;
    }
    if rest.len() > 1 {
        out.push(rest);
    }
    out
}

/// Cantor–Zassenhaus equal-degree splitting; `f` is a square-free product
/// of irreducibles of degree `d`.
fn equal_degree_split(k: &FieldCtx, f: &[u64], d: usize, out: &mut Vec<Vec<u64>>) {
    if f.len() - 1 == d {
        out.push(f.to_vec());
        return;
    }
    // deterministic sequence of "random" polynomials
    let mut seed = 0x9e3779b97f4a7c15u64 ^ (f.len() as u64) ^ ((d as u64) << 32);
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        seed >> 11
    };
    let e = (k.order() as u128).pow(d as u32) / 2; // (q^d - 1)/2 (q odd)
    loop {
        let deg = f.len() - 2;
        let mut a: Vec<u64> = (0..=deg).map(|_| next() % k.order()).collect();
        poly::trim(&mut a);
        if a.len() <= 1 {
            continue;
        }
        // gcd(a, f) may already split
        let g0 = poly::gcd_raw(k, f.to_vec(), a.clone());
        if g0.len() > 1 && g0.len() < f.len() {
            let other = poly::div_raw(k, f, &g0);
            equal_degree_split(k, &g0, d, out);
            equal_degree_split(k, &other, d, out);
            return;
        }
        // a^{(q^d-1)/2} - 1 splits the factors into square/non-square classes
        let mut b = poly::pow_mod_raw(k, &a, e, f);
        if b.is_empty() {
            continue;
        }
        b[0] = k.sub_raw(b[0], 1);
        poly::trim(&mut b);
        if b.is_empty() {
            continue;
        }
        let g = poly::gcd_raw(k, f.to_vec(), b);
        if g.len() > 1 && g.len() < f.len() {
            let other = poly::div_raw(k, f, &g);
            equal_degree_split(k, &g, d, out);
            equal_degree_split(k, &other, d, out);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;

    fn poly(coeffs: &[u64]) -> MonicPoly {
        MonicPoly::from_raw(coeffs.to_vec())
    }

    #[test]
    fn splits_x2_minus_1_over_f5() {
        let k = build_field(5, 1).unwrap();
        let f = poly(&[4, 0, 1]); // x^2 - 1
        let fs = factor_monic(&k, &f);
        assert_eq!(fs.len(), 2);
        assert_eq!(fs[0].0.raw_coeffs(), &[1, 1]); // x + 1
        assert_eq!(fs[1].0.raw_coeffs(), &[4, 1]); // x - 1 = x + 4
        assert!(fs.iter().all(|(_, m)| *m == 1));
    }

    #[test]
    fn x2_plus_1_irreducible_over_f7() {
        let k = build_field(7, 1).unwrap();
        let f = poly(&[1, 0, 1]);
        let fs = factor_monic(&k, &f);
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].1, 1);
        assert_eq!(fs[0].0.degree(), 2);
    }

    #[test]
    fn quartic_over_f5_by_trial_division_oracle() {
        // x^4 + x + 1 over F_5: validate against trial division by all
        // monic irreducibles of degree <= 2
        let k = build_field(5, 1).unwrap();
        let f = poly(&[1, 1, 0, 0, 1]);
        let fs = factor_monic(&k, &f);
        // oracle: collect monic irreducibles of degree 1, 2
        let mut irreds: Vec<Vec<u64>> = Vec::new();
        for a in 0..5u64 {
            irreds.push(vec![a, 1]);
        }
        for a in 0..5u64 {
            for b in 0..5u64 {
                let c = vec![a, b, 1];
                if is_irreducible(&k, &poly(&c)) {
                    irreds.push(c);
                }
            }
        }
        let mut rest = f.raw_coeffs().to_vec();
        let mut oracle: Vec<(Vec<u64>, u32)> = Vec::new();
        for ir in &irreds {
            let mut m = 0;
            loop {
                let r = super::poly::rem_raw(&k, &rest, ir);
                if r.is_empty() {
                    rest = super::poly::div_raw(&k, &rest, ir);
                    m += 1;
                } else {
                    break;
                }
            }
            if m > 0 {
                oracle.push((ir.clone(), m));
            }
        }
        if rest.len() > 1 {
            oracle.push((rest.clone(), 1)); // leftover irreducible of degree > 2
        }
        oracle.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
        let got: Vec<(Vec<u64>, u32)> =
            fs.iter().map(|(f, m)| (f.raw_coeffs().to_vec(), *m)).collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn reexpansion_exhaustive_deg_le_4_over_f5() {
        let k = build_field(5, 1).unwrap();
        for deg in 1..=4usize {
            let total = 5u64.pow(deg as u32);
            for tail in 0..total {
                let mut coeffs = vec![0u64; deg + 1];
                let mut t = tail;
                for c in coeffs.iter_mut().take(deg) {
                    *c = t % 5;
                    t /= 5;
                }
                coeffs[deg] = 1;
                let f = poly(&coeffs);
                let fs = factor_monic(&k, &f);
                let mut prod = vec![1u64];
                for (fac, m) in &fs {
                    for _ in 0..*m {
                        prod = super::poly::mul_raw(&k, &prod, fac.raw_coeffs());
                    }
                }
                assert_eq!(prod, coeffs, "re-expansion failed for {coeffs:?}");
            }
        }
    }

    #[test]
    fn factors_over_extension_field() {
        let k = build_field(5, 2).unwrap();
        // x^2 + 2 is irreducible over F_5 but splits over F_25
        let f = poly(&[2, 0, 1]);
        let fs = factor_monic(&k, &f);
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|(g, _)| g.degree() == 1));
    }
}
