//! Dense univariate polynomials over a `FieldCtx`, plus the raw prime
//! field routines used during context construction.

use super::ctx::{FieldCtx, FieldElem};

/// A monic polynomial over a field context; coefficients are packed
/// element indices, low to high, with the leading coefficient 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonicPoly {
    pub(crate) coeffs: Vec<u64>,
}

impl MonicPoly {
    /// Builds a monic polynomial from coefficients (low to high); the
    /// caller's leading coefficient must be 1.
    pub fn new(k: &FieldCtx, coeffs: Vec<FieldElem>) -> MonicPoly {
        let raw: Vec<u64> = coeffs.iter().map(|c| c.index()).collect();
        assert!(raw.last() == Some(&1), "polynomial is not monic");
        let _ = k;
        MonicPoly { coeffs: raw }
    }

    /// Monic polynomial from packed indices (must end with 1).
    pub fn from_raw(coeffs: Vec<u64>) -> MonicPoly {
        assert!(coeffs.last() == Some(&1), "polynomial is not monic");
        MonicPoly { coeffs }
    }

    /// `x - a`.
    pub fn linear(k: &FieldCtx, a: FieldElem) -> MonicPoly {
        MonicPoly { coeffs: vec![k.neg(a).index(), 1] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn raw_coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: &FieldCtx, i: usize) -> FieldElem {
        k.elem(*self.coeffs.get(i).unwrap_or(&0))
    }

    pub fn eval(&self, k: &FieldCtx, x: FieldElem) -> FieldElem {
        let mut acc = k.zero();
        for &c in self.coeffs.iter().rev() {
            acc = k.add(k.mul(acc, x), k.elem(c));
        }
        acc
    }

    pub fn mul(&self, k: &FieldCtx, other: &MonicPoly) -> MonicPoly {
        MonicPoly { coeffs: mul_raw(k, &self.coeffs, &other.coeffs) }
    }

    /// Formal derivative (not monic in general; returned as raw coeffs).
    pub fn derivative_raw(&self, k: &FieldCtx) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        for (i, &c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(k.scale_raw(c, (i as u64) % k.p()));
        }
        trim(&mut out);
        out
    }

    /// Whether the polynomial is square-free: `gcd(f, f') = 1`.
    pub fn is_square_free(&self, k: &FieldCtx) -> bool {
        let d = self.derivative_raw(k);
        if d.is_empty() {
            return false;
        }
        gcd_raw(k, self.coeffs.clone(), d).len() == 1
    }
}

pub(crate) fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub(crate) fn mul_raw(k: &FieldCtx, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0 {
                out[i + j] = k.add_raw(out[i + j], k.mul_raw(ai, bj));
            }
        }
    }
    out
}

/// Remainder of `a` divided by `b` (raw coefficient vectors).
pub(crate) fn rem_raw(k: &FieldCtx, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    trim(&mut r);
    let mut bb = b.to_vec();
    trim(&mut bb);
    assert!(!bb.is_empty(), "division by zero polynomial");
    let db = bb.len() - 1;
    let lead_inv = k.inv_raw(bb[db]);
    while r.len() > db {
        let dr = r.len() - 1;
        let f = k.mul_raw(r[dr], lead_inv);
        if f != 0 {
            for i in 0..=db {
                let t = k.mul_raw(f, bb[i]);
                r[dr - db + i] = k.sub_raw(r[dr - db + i], t);
            }
        }
        r.pop();
        trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

/// Quotient of `a` by `b`.
pub(crate) fn div_raw(k: &FieldCtx, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    trim(&mut r);
    let mut bb = b.to_vec();
    trim(&mut bb);
    assert!(!bb.is_empty(), "division by zero polynomial");
    let db = bb.len() - 1;
    if r.len() <= db {
        return Vec::new();
    }
    let mut q = vec![0u64; r.len() - db];
    let lead_inv = k.inv_raw(bb[db]);
    while r.len() > db {
        let dr = r.len() - 1;
        let f = k.mul_raw(r[dr], lead_inv);
        q[dr - db] = f;
        if f != 0 {
            for i in 0..=db {
                let t = k.mul_raw(f, bb[i]);
                r[dr - db + i] = k.sub_raw(r[dr - db + i], t);
            }
        }
        r.pop();
        trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    q
}

/// Monic gcd.
pub(crate) fn gcd_raw(k: &FieldCtx, mut a: Vec<u64>, mut b: Vec<u64>) -> Vec<u64> {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem_raw(k, &a, &b);
        a = b;
        b = r;
    }
    // normalize monic
    if let Some(&lead) = a.last() {
        if lead != 1 {
            let inv = k.inv_raw(lead);
            for c in a.iter_mut() {
                *c = k.mul_raw(*c, inv);
            }
        }
    }
    a
}

/// `a - q*b` on raw coefficient vectors.
fn sub_mul_raw(k: &FieldCtx, a: &[u64], q: &[u64], b: &[u64]) -> Vec<u64> {
    let mut prod = mul_raw(k, q, b);
    let len = prod.len().max(a.len());
    prod.resize(len, 0);
    let mut out = a.to_vec();
    out.resize(len, 0);
    for (o, &p) in out.iter_mut().zip(&prod) {
        *o = k.sub_raw(*o, p);
    }
    trim(&mut out);
    out
}

/// Extended gcd: returns `(g, u, v)` with `u a + v b = g`, `g` monic.
pub(crate) fn xgcd_raw(k: &FieldCtx, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
    let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
    trim(&mut r0);
    trim(&mut r1);
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let q = div_raw(k, &r0, &r1);
        let r2 = rem_raw(k, &r0, &r1);
        let s2 = sub_mul_raw(k, &s0, &q, &s1);
        let t2 = sub_mul_raw(k, &t0, &q, &t1);
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if let Some(&lead) = r0.last() {
        if lead != 1 {
            let inv = k.inv_raw(lead);
            for v in [&mut r0, &mut s0, &mut t0] {
                for c in v.iter_mut() {
                    *c = k.mul_raw(*c, inv);
                }
            }
        }
    }
    (r0, s0, t0)
}

/// `base^e mod m` for raw polynomials.
pub(crate) fn pow_mod_raw(k: &FieldCtx, base: &[u64], mut e: u128, m: &[u64]) -> Vec<u64> {
    let mut b = rem_raw(k, base, m);
    let mut r = vec![1u64];
    while e > 0 {
        if e & 1 == 1 {
            r = rem_raw(k, &mul_raw(k, &r, &b), m);
        }
        b = rem_raw(k, &mul_raw(k, &b, &b), m);
        e >>= 1;
    }
    r
}

/// Irreducibility over the prime field for raw integer coefficient
/// vectors (used during `FieldCtx` construction, before any context
/// exists): checks `gcd(x^{p^i} - x, f) = 1` for `i <= n/2` and
/// `x^{p^n} = x mod f`.
pub(crate) fn is_irreducible_raw(f: &[u64], p: u64) -> bool {
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    // arithmetic on Vec<u64> mod p, mod f
    let trim_p = |v: &mut Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
    };
    let rem = |a: &[u64], m: &[u64]| -> Vec<u64> {
        let mut r = a.to_vec();
        trim_p(&mut r);
        let dm = m.len() - 1;
        while r.len() > dm {
            let dr = r.len() - 1;
            let c = r[dr]; // m monic
            if c != 0 {
                for i in 0..=dm {
                    if m[i] != 0 {
                        r[dr - dm + i] = (r[dr - dm + i] + (p - m[i]) * c) % p;
                    }
                }
            }
            r.pop();
            trim_p(&mut r);
            if r.is_empty() {
                break;
            }
        }
        r
    };
    let mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + ai * bj) % p;
            }
        }
        out
    };
    let gcd = |mut a: Vec<u64>, mut b: Vec<u64>| -> Vec<u64> {
        trim_p(&mut a);
        trim_p(&mut b);
        while !b.is_empty() {
            // make b monic for rem
            let lead = *b.last().unwrap();
            if lead != 1 {
                let inv = {
                    // p prime: Fermat inverse
                    let mut r = 1u64;
                    let mut bb = lead;
                    let mut e = p - 2;
                    while e > 0 {
                        if e & 1 == 1 {
                            r = r * bb % p;
                        }
                        bb = bb * bb % p;
                        e >>= 1;
                    }
                    r
                };
                for c in b.iter_mut() {
                    *c = *c * inv % p;
                }
            }
            let r = rem(&a, &b);
            a = b;
            b = r;
        }
        a
    };
    let powx = |e: u64, m: &[u64]| -> Vec<u64> {
        let mut b = rem(&[0, 1], m);
        let mut r = vec![1u64];
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                r = rem(&mul(&r, &b), m);
            }
            b = rem(&mul(&b, &b), m);
            e >>= 1;
        }
        r
    };

    // x^{p^i} by repeated p-powering mod f
    let mut xp = powx(p, f);
    for i in 1..=n / 2 {
        if i > 1 {
            // xp = xp^p mod f
            let mut acc = vec![1u64];
            let mut base = xp.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = rem(&mul(&acc, &base), f);
                }
                base = rem(&mul(&base, &base), f);
                e >>= 1;
            }
            xp = acc;
        }
        // gcd(xp - x, f) must be 1
        let mut diff = xp.clone();
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        trim_p(&mut diff);
        let g = gcd(f.to_vec(), diff);
        if g.len() != 1 {
            return false;
        }
    }
    // and x^{p^n} = x mod f
    let mut xpn = xp;
    for _ in (n / 2)..n {
        let mut acc = vec![1u64];
        let mut base = xpn.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &base), f);
            }
            base = rem(&mul(&base, &base), f);
            e >>= 1;
        }
        xpn = acc;
    }
    xpn == vec![0, 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;

    #[test]
    fn irreducible_raw_basics() {
        // x^2+1 over F_7 irreducible, over F_5 not
        assert!(is_irreducible_raw(&[1, 0, 1], 7));
        assert!(!is_irreducible_raw(&[1, 0, 1], 5));
        // x^2 - 2 over F_5 irreducible (2 is a non-residue)
        assert!(is_irreducible_raw(&[3, 0, 1], 5));
    }

    #[test]
    fn poly_division_roundtrip() {
        let k = build_field(7, 1).unwrap();
        let a = vec![3u64, 1, 4, 1, 5, 1]; // arbitrary
        let b = vec![2u64, 0, 1];
        let q = div_raw(&k, &a, &b);
        let r = rem_raw(&k, &a, &b);
        let mut back = mul_raw(&k, &q, &b);
        for (i, &c) in r.iter().enumerate() {
            back[i] = k.add_raw(back[i], c);
        }
        trim(&mut back);
        let mut aa = a.clone();
        trim(&mut aa);
        assert_eq!(back, aa);
    }

    #[test]
    fn square_free_detection() {
        let k = build_field(5, 1).unwrap();
        let sq = MonicPoly::from_raw(vec![1, 2, 1]); // (x+1)^2
        assert!(!sq.is_square_free(&k));
        let sf = MonicPoly::from_raw(vec![4, 0, 1]); // x^2-1
        assert!(sf.is_square_free(&k));
    }
}
