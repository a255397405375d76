use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

use super::poly;
use super::DEFAULT_DLOG_TABLE_LIMIT;

/// Maximum supported extension degree over the prime field.
pub const MAX_DEGREE: usize = 32;

static NEXT_CTX_ID: AtomicU32 = AtomicU32::new(1);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus is reducible over F_p")]
    CompositeModulus,
    #[error("modulus degree {got} does not match extension degree {want}")]
    BadModulusDegree { got: usize, want: usize },
    #[error("base degree {base} does not divide extension degree {ext}")]
    DegreeNotDivisible { base: usize, ext: usize },
    #[error("discrete log of zero requested")]
    ZeroElement,
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("p^n = {0} overflows the supported element range")]
    Overflow(String),
    #[error("element does not lie in the requested subfield")]
    NotInSubfield,
}

/// An element of a finite field, tied to the context that created it.
///
/// The packed index encodes the coefficient vector of the element in the
/// polynomial basis, base `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem {
    pub(crate) idx: u64,
    pub(crate) ctx: u32,
}

impl FieldElem {
    /// Packed base-`p` index of the element.
    pub fn index(self) -> u64 {
        self.idx
    }
}

/// Arithmetic context for `F_{p^n}`.
///
/// Immutable after construction and safe to share across threads; all
/// operations are pure functions of `(ctx, inputs)`.
pub struct FieldCtx {
    id: u32,
    p: u64,
    n: usize,
    q: u64,
    q_big: BigUint,
    /// Monic irreducible modulus, coefficients low to high, length `n+1`.
    modulus: Vec<u64>,
    pows: Vec<u64>,
    generator: u64,
    exp: Option<Vec<u32>>,
    log: Option<Vec<u32>>,
    /// `Tr_{F_q/F_p}(x^i)` for `i < n`, as residues mod `p`.
    trace_form: Vec<u64>,
    /// `x^{ip} mod modulus` for `i < n`: the p-power Frobenius as an
    /// `F_p`-linear map on the polynomial basis.
    frob_basis: Vec<u64>,
}

impl std::fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "FieldCtx(p={}, n={}, modulus={:?}, tables={})",
            self.p,
            self.n,
            self.modulus,
            self.exp.is_some()
        )
    }
}

fn is_prime_u64(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    for d in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if m % d == 0 {
            return m == d;
        }
    }
    // deterministic Miller-Rabin for u64
    let mut d = m - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if a % m == 0 {
            continue;
        }
        let mut x = mod_pow_u64(a, d, m);
        if x == 1 || x == m - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mod_mul_u64(x, x, m);
            if x == m - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mod_mul_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn mod_pow_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mod_mul_u64(r, b, m);
        }
        b = mod_mul_u64(b, b, m);
        e >>= 1;
    }
    r
}

/// Prime factorization of a `u64` by trial division; adequate for the
/// group orders `p^n - 1` arising at desk scale.
pub(crate) fn factorize_u64(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d as u128 * d as u128 <= m as u128 {
        if m % d == 0 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Builds `F_{p^n}` with the lexicographically smallest irreducible
/// modulus (smallest packed coefficient index), full dlog tables when
/// `p^n` is at most the default table limit.
pub fn build_field(p: u64, n: usize) -> Result<Arc<FieldCtx>, GfError> {
    build_field_with(p, n, None, DEFAULT_DLOG_TABLE_LIMIT)
}

/// Builds `F_{p^n}`, optionally with a caller-supplied monic modulus and
/// an explicit dlog table cutoff.
pub fn build_field_with(
    p: u64,
    n: usize,
    modulus: Option<Vec<u64>>,
    table_limit: u64,
) -> Result<Arc<FieldCtx>, GfError> {
    if p == 2 {
        return Err(GfError::EvenCharacteristic);
    }
    if !is_prime_u64(p) {
        return Err(GfError::NotPrime(p));
    }
    if p >= 1 << 31 {
        // digit products must fit in u64
        return Err(GfError::Overflow(format!("characteristic {p}")));
    }
    assert!(n >= 1 && n <= MAX_DEGREE, "extension degree out of range");
    let mut pows = Vec::with_capacity(n + 1);
    let mut acc: u64 = 1;
    pows.push(acc);
    for _ in 0..n {
        acc = acc.checked_mul(p).ok_or_else(|| GfError::Overflow(format!("{p}^{n}")))?;
        pows.push(acc);
    }
    let q = pows[n];
    if (q >> 62) != 0 {
        return Err(GfError::Overflow(format!("{p}^{n}")));
    }

    let modulus = match modulus {
        Some(m) => {
            let mut m = m;
            for c in m.iter_mut() {
                *c %= p;
            }
            if m.len() != n + 1 || m[n] != 1 {
                return Err(GfError::BadModulusDegree { got: m.len().saturating_sub(1), want: n });
            }
            if n > 1 && !poly::is_irreducible_raw(&m, p) {
                return Err(GfError::CompositeModulus);
            }
            m
        }
        None => smallest_irreducible(p, n),
    };

    let mut ctx = FieldCtx {
        id: NEXT_CTX_ID.fetch_add(1, Ordering::Relaxed),
        p,
        n,
        q,
        q_big: BigUint::from(p).pow(n as u32),
        modulus,
        pows,
        generator: 0,
        exp: None,
        log: None,
        trace_form: Vec::new(),
        frob_basis: Vec::new(),
    };

    // Frobenius images of the basis
    let mut frob = Vec::with_capacity(n);
    for i in 0..n {
        frob.push(ctx.pow_raw(ctx.x_power(i), ctx.p as u128));
    }
    ctx.frob_basis = frob;

    // trace form Tr(x^i)
    let mut tf = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = ctx.x_power(i);
        let mut sum = acc;
        for _ in 1..n {
            acc = ctx.frobenius_raw(acc);
            sum = ctx.add_raw(sum, acc);
        }
        debug_assert!(sum < p, "trace of basis element must lie in F_p");
        tf.push(sum);
    }
    ctx.trace_form = tf;

    ctx.generator = ctx.find_generator();

    if q <= table_limit && q < (u32::MAX as u64) {
        let order = (q - 1) as usize;
        let mut exp = vec![0u32; order];
        let mut log = vec![u32::MAX; q as usize];
        let mut cur = 1u64;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = cur as u32;
            log[cur as usize] = i as u32;
            cur = ctx.mul_raw(cur, ctx.generator);
        }
        debug_assert_eq!(cur, 1);
        ctx.exp = Some(exp);
        ctx.log = Some(log);
    }

    Ok(Arc::new(ctx))
}

fn smallest_irreducible(p: u64, n: usize) -> Vec<u64> {
    if n == 1 {
        // modulus x: F_p itself
        return vec![0, 1];
    }
    let total = p.pow(n as u32);
    let mut cand = vec![0u64; n + 1];
    cand[n] = 1;
    for tail in 0..total {
        let mut t = tail;
        for c in cand.iter_mut().take(n) {
            *c = t % p;
            t /= p;
        }
        if cand[0] == 0 {
            continue; // divisible by x
        }
        if poly::is_irreducible_raw(&cand, p) {
            return cand;
        }
    }
    unreachable!("irreducible polynomials of every degree exist");
}

impl FieldCtx {
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn degree(&self) -> usize {
        self.n
    }
    /// Field order `p^n` .
    pub fn order(&self) -> u64 {
        self.q
    }
    /// Field order as an arbitrary-precision integer.
    pub fn order_big(&self) -> &BigUint {
        &self.q_big
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }
    pub fn has_tables(&self) -> bool {
        self.exp.is_some()
    }
    pub fn generator(&self) -> FieldElem {
        self.wrap(self.generator)
    }
    pub fn zero(&self) -> FieldElem {
        self.wrap(0)
    }
    pub fn one(&self) -> FieldElem {
        self.wrap(1)
    }
    /// The class of `x` (the modulus variable).
    pub fn x(&self) -> FieldElem {
        self.wrap(self.x_power(1))
    }

    /// Embeds a residue mod `p` as a constant.
    pub fn from_base(&self, c: u64) -> FieldElem {
        self.wrap(c % self.p)
    }

    /// Element with the given packed index (panics when out of range).
    pub fn elem(&self, idx: u64) -> FieldElem {
        assert!(idx < self.q, "packed index out of range");
        self.wrap(idx)
    }

    /// Element from a coefficient vector (low to high, residues mod p).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> FieldElem {
        assert!(coeffs.len() <= self.n, "too many coefficients");
        let mut idx = 0u64;
        for (i, &c) in coeffs.iter().enumerate() {
            idx += (c % self.p) * self.pows[i];
        }
        self.wrap(idx)
    }

    pub fn coeffs(&self, a: FieldElem) -> Vec<u64> {
        self.check(a);
        let mut v = Vec::with_capacity(self.n);
        let mut t = a.idx;
        for _ in 0..self.n {
            v.push(t % self.p);
            t /= self.p;
        }
        v
    }

    /// Iterator over all field elements in packed-index order.
    pub fn all_elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q).map(move |i| self.wrap(i))
    }

    fn wrap(&self, idx: u64) -> FieldElem {
        FieldElem { idx, ctx: self.id }
    }

    #[inline]
    fn check(&self, a: FieldElem) {
        assert_eq!(a.ctx, self.id, "element used with a foreign field context");
    }

    #[inline]
    fn x_power(&self, i: usize) -> u64 {
        if i < self.n {
            self.pows[i]
        } else {
            // reduce x^i mod modulus
            let mut acc = self.pows[self.n - 1];
            for _ in (self.n - 1)..i {
                acc = self.mul_by_x_raw(acc);
            }
            acc
        }
    }

    // ---- raw packed-index arithmetic -------------------------------------

    #[inline]
    pub(crate) fn add_raw(&self, a: u64, b: u64) -> u64 {
        let (p, mut out, mut mult) = (self.p, 0u64, 1u64);
        let (mut a, mut b) = (a, b);
        for _ in 0..self.n {
            let s = a % p + b % p;
            out += (if s >= p { s - p } else { s }) * mult;
            a /= p;
            b /= p;
            mult *= p;
        }
        out
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u64) -> u64 {
        let (p, mut out, mut mult) = (self.p, 0u64, 1u64);
        let mut a = a;
        for _ in 0..self.n {
            let d = a % p;
            out += (if d == 0 { 0 } else { p - d }) * mult;
            a /= p;
            mult *= p;
        }
        out
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u64, b: u64) -> u64 {
        self.add_raw(a, self.neg_raw(b))
    }

    #[inline]
    fn mul_by_x_raw(&self, a: u64) -> u64 {
        // multiply by x and reduce once
        let top = a / self.pows[self.n - 1];
        let shifted = (a % self.pows[self.n - 1]) * self.p;
        if top == 0 {
            return shifted;
        }
        // subtract top * (modulus - x^n)
        let mut out = shifted;
        let p = self.p;
        for (i, &c) in self.modulus.iter().enumerate().take(self.n) {
            if c != 0 {
                let d = (c * top) % p;
                if d != 0 {
                    let cur = (out / self.pows[i]) % p;
                    let nv = if cur >= d { cur - d } else { cur + p - d };
                    out = out - cur * self.pows[i] + nv * self.pows[i];
                }
            }
        }
        out
    }

    pub(crate) fn mul_raw(&self, a: u64, b: u64) -> u64 {
        if let (Some(exp), Some(log)) = (&self.exp, &self.log) {
            if a == 0 || b == 0 {
                return 0;
            }
            let order = self.q - 1;
            let s = log[a as usize] as u64 + log[b as usize] as u64;
            let s = if s >= order { s - order } else { s };
            return exp[s as usize] as u64;
        }
        self.mul_schoolbook(a, b)
    }

    fn mul_schoolbook(&self, a: u64, b: u64) -> u64 {
        let p = self.p;
        let n = self.n;
        let mut da = [0u64; MAX_DEGREE];
        let mut db = [0u64; MAX_DEGREE];
        let mut prod = [0u64; 2 * MAX_DEGREE];
        let (mut ta, mut tb) = (a, b);
        for i in 0..n {
            da[i] = ta % p;
            db[i] = tb % p;
            ta /= p;
            tb /= p;
        }
        for i in 0..n {
            if da[i] == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            }
        }
        // reduce degrees 2n-2 .. n against the monic modulus
        for i in (n..2 * n - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (j, &m) in self.modulus.iter().enumerate().take(n) {
                if m != 0 {
                    prod[i - n + j] = (prod[i - n + j] + (p - m) * c) % p;
                }
            }
        }
        let mut out = 0u64;
        for i in (0..n).rev() {
            out = out * p + prod[i];
        }
        out
    }

    pub(crate) fn pow_raw(&self, mut b: u64, mut e: u128) -> u64 {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_raw(r, b);
            }
            b = self.mul_raw(b, b);
            e >>= 1;
        }
        r
    }

    pub(crate) fn inv_raw(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero");
        if let (Some(exp), Some(log)) = (&self.exp, &self.log) {
            let order = self.q - 1;
            let l = log[a as usize] as u64;
            if l == 0 {
                return 1;
            }
            return exp[(order - l) as usize] as u64;
        }
        self.pow_raw(a, (self.q - 2) as u128)
    }

    pub(crate) fn frobenius_raw(&self, a: u64) -> u64 {
        if self.n == 1 {
            return a;
        }
        if let (Some(exp), Some(log)) = (&self.exp, &self.log) {
            if a == 0 {
                return 0;
            }
            let order = (self.q - 1) as u128;
            let l = log[a as usize] as u128;
            return exp[((l * self.p as u128) % order) as usize] as u64;
        }
        // F_p-linear combination of precomputed basis images
        let p = self.p;
        let mut out = 0u64;
        let mut t = a;
        for i in 0..self.n {
            let d = t % p;
            if d != 0 {
                out = self.add_raw(out, self.scale_raw(self.frob_basis[i], d));
            }
            t /= p;
        }
        out
    }

    #[inline]
    pub(crate) fn scale_raw(&self, a: u64, c: u64) -> u64 {
        // multiply by a base-field constant
        let p = self.p;
        let (mut out, mut mult, mut t) = (0u64, 1u64, a);
        for _ in 0..self.n {
            out += (t % p * c) % p * mult;
            t /= p;
            mult *= p;
        }
        out
    }

    /// Absolute trace `Tr_{F_q/F_p}` as a residue mod `p`.
    #[inline]
    pub(crate) fn trace_abs_raw(&self, a: u64) -> u64 {
        let p = self.p;
        let (mut acc, mut t) = (0u64, a);
        for i in 0..self.n {
            acc = (acc + (t % p) * self.trace_form[i]) % p;
            t /= p;
        }
        acc
    }

    fn find_generator(&self) -> u64 {
        let order = self.q - 1;
        let facs = factorize_u64(order);
        'cand: for c in 2..self.q {
            for &(f, _) in &facs {
                if self.pow_raw(c, (order / f) as u128) == 1 {
                    continue 'cand;
                }
            }
            return c;
        }
        unreachable!("multiplicative group of a finite field is cyclic")
    }

    // ---- public element operations ---------------------------------------

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.check(a);
        self.check(b);
        self.wrap(self.add_raw(a.idx, b.idx))
    }
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.check(a);
        self.check(b);
        self.wrap(self.sub_raw(a.idx, b.idx))
    }
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        self.check(a);
        self.wrap(self.neg_raw(a.idx))
    }
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.check(a);
        self.check(b);
        self.wrap(self.mul_raw(a.idx, b.idx))
    }
    pub fn inv(&self, a: FieldElem) -> FieldElem {
        self.check(a);
        self.wrap(self.inv_raw(a.idx))
    }
    pub fn pow(&self, a: FieldElem, e: u128) -> FieldElem {
        self.check(a);
        self.wrap(self.pow_raw(a.idx, e))
    }
    /// `x -> x^p`, the absolute Frobenius.
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.check(a);
        self.wrap(self.frobenius_raw(a.idx))
    }
    /// `x -> x^{p^i}`.
    pub fn frobenius_iter(&self, a: FieldElem, i: usize) -> FieldElem {
        self.check(a);
        let mut r = a.idx;
        for _ in 0..(i % self.n) {
            r = self.frobenius_raw(r);
        }
        self.wrap(r)
    }
    pub fn is_zero(&self, a: FieldElem) -> bool {
        self.check(a);
        a.idx == 0
    }

    /// Absolute trace to the prime field, as a residue mod `p`.
    pub fn trace_abs(&self, a: FieldElem) -> u64 {
        self.check(a);
        self.trace_abs_raw(a.idx)
    }

    /// Discrete logarithm with respect to the stored generator.
    ///
    /// Table lookup when tables were built, baby-step/giant-step
    /// otherwise.
    pub fn dlog(&self, a: FieldElem) -> Result<u64, GfError> {
        self.check(a);
        if a.idx == 0 {
            return Err(GfError::ZeroElement);
        }
        if let Some(log) = &self.log {
            return Ok(log[a.idx as usize] as u64);
        }
        Ok(self.dlog_bsgs(a.idx))
    }

    fn dlog_bsgs(&self, a: u64) -> u64 {
        let order = self.q - 1;
        let m = (order as f64).sqrt().ceil() as u64;
        let mut baby: HashMap<u64, u64> = HashMap::with_capacity(m as usize);
        let mut cur = 1u64;
        for j in 0..m {
            baby.entry(cur).or_insert(j);
            cur = self.mul_raw(cur, self.generator);
        }
        // giant step: g^{-m}
        let gm_inv = self.inv_raw(self.pow_raw(self.generator, m as u128));
        let mut gamma = a;
        for i in 0..=m {
            if let Some(&j) = baby.get(&gamma) {
                return (i * m + j) % order;
            }
            gamma = self.mul_raw(gamma, gm_inv);
        }
        unreachable!("dlog exists for every nonzero element")
    }

    /// `generator^e`.
    pub fn exp_gen(&self, e: u64) -> FieldElem {
        let order = self.q - 1;
        let e = e % order;
        if let Some(exp) = &self.exp {
            return self.wrap(exp[e as usize] as u64);
        }
        self.wrap(self.pow_raw(self.generator, e as u128))
    }

    /// Quadratic character: `+1` on nonzero squares, `-1` on nonsquares,
    /// `0` at zero.
    pub fn quadratic_char(&self, a: FieldElem) -> i32 {
        self.check(a);
        self.quadratic_char_raw(a.idx)
    }

    #[inline]
    pub(crate) fn quadratic_char_raw(&self, a: u64) -> i32 {
        if a == 0 {
            return 0;
        }
        if let Some(log) = &self.log {
            return if log[a as usize] % 2 == 0 { 1 } else { -1 };
        }
        if self.pow_raw(a, ((self.q - 1) / 2) as u128) == 1 {
            1
        } else {
            -1
        }
    }

    /// Relative trace `Tr_{k_n/k_m}(x) = sum x^{q_m^i}`, re-expressed in
    /// the degree-`m` subfield context through the embedding.
    pub fn relative_trace(
        &self,
        a: FieldElem,
        sub: &FieldCtx,
        emb: &Embedding,
    ) -> Result<FieldElem, GfError> {
        self.check(a);
        emb.check_pair(sub, self)?;
        let steps = self.n / sub.n;
        let mut acc = a.idx;
        let mut sum = acc;
        for _ in 1..steps {
            for _ in 0..sub.n {
                acc = self.frobenius_raw(acc);
            }
            sum = self.add_raw(sum, acc);
        }
        emb.project(self.wrap(sum), sub, self)
    }

    /// Relative norm `N_{k_n/k_m}(x) = prod x^{q_m^i}`, re-expressed in
    /// the degree-`m` subfield context.
    pub fn relative_norm(
        &self,
        a: FieldElem,
        sub: &FieldCtx,
        emb: &Embedding,
    ) -> Result<FieldElem, GfError> {
        self.check(a);
        emb.check_pair(sub, self)?;
        let steps = self.n / sub.n;
        let mut acc = a.idx;
        let mut prod = acc;
        for _ in 1..steps {
            for _ in 0..sub.n {
                acc = self.frobenius_raw(acc);
            }
            prod = self.mul_raw(prod, acc);
        }
        emb.project(self.wrap(prod), sub, self)
    }

    /// Norm to the prime field, as a residue mod `p`.
    pub fn norm_abs(&self, a: FieldElem) -> u64 {
        self.check(a);
        self.norm_abs_raw(a.idx)
    }

    pub(crate) fn norm_abs_raw(&self, a: u64) -> u64 {
        if a == 0 {
            return 0;
        }
        let e = (self.q - 1) / (self.p - 1);
        let r = self.pow_raw(a, e as u128);
        debug_assert!(r < self.p);
        r
    }

    /// Characteristic polynomial of `x` for the extension `k_n / F_p`:
    /// `prod_{i<n} (T - x^{p^i})`, a monic polynomial with prime-field
    /// coefficients (returned as residues mod `p`, low to high).
    pub fn charpoly_abs(&self, a: FieldElem) -> Vec<u64> {
        self.check(a);
        self.charpoly_abs_raw(a.idx)
    }

    pub(crate) fn charpoly_abs_raw(&self, a: u64) -> Vec<u64> {
        let n = self.n;
        // multiply out prod (T - sigma^i(a)) with coefficients in F_q
        let mut coeffs = vec![0u64; n + 1];
        coeffs[0] = 1; // constant 1 polynomial, will shift as we multiply
        let mut deg = 0usize;
        let mut conj = a;
        for i in 0..n {
            if i > 0 {
                conj = self.frobenius_raw(conj);
            }
            let neg = self.neg_raw(conj);
            // (current) * (T + neg)
            let mut next = vec![0u64; n + 1];
            for d in 0..=deg {
                let c = coeffs[d];
                if c == 0 {
                    continue;
                }
                next[d + 1] = self.add_raw(next[d + 1], c);
                next[d] = self.add_raw(next[d], self.mul_raw(c, neg));
            }
            coeffs = next;
            deg += 1;
        }
        coeffs
            .into_iter()
            .map(|c| {
                debug_assert!(c < self.p, "charpoly coefficient must be rational over F_p");
                c
            })
            .collect()
    }
}

/// Explicit embedding of `F_{p^m}` into `F_{p^{mk}}`, stored as the image
/// of the subfield's `x` plus an echelonized solver for projecting
/// subfield-valued elements back down.
pub struct Embedding {
    sub_id: u32,
    sup_id: u32,
    /// powers of the chosen root: image of x^i for i < m
    root_powers: Vec<u64>,
    /// row-echelon data for solving  sum c_i root_powers[i] = y  over F_p
    solve_rows: Vec<(usize, Vec<u64>)>,
    p: u64,
    sup_n: usize,
}

impl Embedding {
    /// Computes the embedding of `sub` into `sup` by finding the smallest
    /// root (in packed-index order) of the subfield modulus in the big
    /// field.
    pub fn new(sub: &FieldCtx, sup: &FieldCtx) -> Result<Embedding, GfError> {
        if sub.p != sup.p {
            return Err(GfError::NotPrime(sub.p));
        }
        if sup.n % sub.n != 0 {
            return Err(GfError::DegreeNotDivisible { base: sub.n, ext: sup.n });
        }
        let root = if sub.n == 1 {
            // prime subfield: constants embed as constants; the "root" of
            // the modulus x is 0
            0
        } else {
            smallest_root_in(sup, &sub.modulus)
        };
        let mut root_powers = Vec::with_capacity(sub.n);
        let mut acc = 1u64;
        for _ in 0..sub.n {
            root_powers.push(acc);
            acc = sup.mul_raw(acc, root);
        }

        // Gaussian elimination over F_p on the (sup.n x sub.n) matrix whose
        // columns are the root powers, to solve downward projections.
        let p = sup.p;
        let rows = sup.n;
        let cols = sub.n;
        let mut mat = vec![vec![0u64; cols + 1]; rows];
        for (j, &rp) in root_powers.iter().enumerate() {
            let mut t = rp;
            for row in mat.iter_mut().take(rows) {
                row[j] = t % p;
                t /= p;
            }
        }
        // echelonize (store pivot column order); RHS filled per solve
        let mut solve_rows: Vec<(usize, Vec<u64>)> = Vec::new();
        let mut used = vec![false; rows];
        for col in 0..cols {
            let mut pivot = None;
            for (r, row) in mat.iter().enumerate() {
                if !used[r] && row[col] % p != 0 {
                    pivot = Some(r);
                    break;
                }
            }
            let r0 = pivot.expect("root powers are linearly independent");
            used[r0] = true;
            let inv = mod_pow_u64(mat[r0][col], p - 2, p);
            let norm_row: Vec<u64> = mat[r0].iter().map(|&v| v % p * inv % p).collect();
            mat[r0] = norm_row.clone();
            for r in 0..rows {
                if r != r0 && mat[r][col] != 0 {
                    let f = mat[r][col];
                    for c in 0..=cols {
                        let sub_v = norm_row[c] * f % p;
                        mat[r][c] = (mat[r][c] + p - sub_v) % p;
                    }
                }
            }
            solve_rows.push((r0, norm_row));
        }
        Ok(Embedding {
            sub_id: sub.id,
            sup_id: sup.id,
            root_powers,
            solve_rows,
            p,
            sup_n: sup.n,
        })
    }

    fn check_pair(&self, sub: &FieldCtx, sup: &FieldCtx) -> Result<(), GfError> {
        if sub.id != self.sub_id || sup.id != self.sup_id {
            return Err(GfError::NotInSubfield);
        }
        Ok(())
    }

    /// Maps a subfield element up into the big field.
    pub fn lift(&self, a: FieldElem, sub: &FieldCtx, sup: &FieldCtx) -> FieldElem {
        sub.check(a);
        self.check_pair(sub, sup).expect("embedding/context mismatch");
        let mut out = 0u64;
        let mut t = a.idx;
        for &rp in &self.root_powers {
            let d = t % sub.p;
            if d != 0 {
                out = sup.add_raw(out, sup.scale_raw(rp, d));
            }
            t /= sub.p;
        }
        sup.wrap(out)
    }

    /// Projects a big-field element known to lie in the embedded subfield
    /// back to the subfield context; errors when it does not lie there.
    pub fn project(&self, y: FieldElem, sub: &FieldCtx, sup: &FieldCtx) -> Result<FieldElem, GfError> {
        sup.check(y);
        self.check_pair(sub, sup)?;
        let p = self.p;
        // digits of y
        let mut rhs = vec![0u64; self.sup_n];
        let mut t = y.idx;
        for r in rhs.iter_mut() {
            *r = t % p;
            t /= p;
        }
        // forward-substitute through the stored echelon rows
        let cols = self.root_powers.len();
        let mut sol = vec![0u64; cols];
        let mut residual = rhs.clone();
        for (col, (r0, row)) in self.solve_rows.iter().enumerate() {
            let v = residual[*r0] % p;
            sol[col] = v;
            if v != 0 {
                // subtract v * column(col..) effect: reconstruct from root_powers
                let mut tt = self.root_powers[col];
                for r in residual.iter_mut().take(self.sup_n) {
                    let d = tt % p;
                    *r = (*r + p - (d * v) % p) % p;
                    tt /= p;
                }
            }
            let _ = row;
        }
        if residual.iter().any(|&r| r % p != 0) {
            return Err(GfError::NotInSubfield);
        }
        let mut idx = 0u64;
        let mut mult = 1u64;
        for &c in &sol {
            idx += c * mult;
            mult *= p;
        }
        Ok(FieldElem { idx, ctx: self.sub_id })
    }
}

/// Finds the smallest root (packed-index order) of a monic polynomial
/// with prime-field coefficients inside `sup`.
fn smallest_root_in(sup: &FieldCtx, poly_coeffs: &[u64]) -> u64 {
    // roots are the elements fixed appropriately; for small fields scan,
    // otherwise use the fact that roots of the degree-m modulus generate
    // the subfield: scan multiplicatively via x^{(q-1)/(p^m-1)} cosets.
    let eval = |x: u64| -> u64 {
        let mut acc = 0u64;
        for &c in poly_coeffs.iter().rev() {
            acc = sup.add_raw(sup.mul_raw(acc, x), c % sup.p);
        }
        acc
    };
    if sup.q <= 1 << 22 {
        for x in 0..sup.q {
            if eval(x) == 0 {
                return x;
            }
        }
        unreachable!("modulus splits in any field containing its splitting field");
    }
    // large field: roots lie in the subfield of order p^m; its elements are
    // 0 and powers g^{k (q-1)/(p^m-1)}
    let m = poly_coeffs.len() - 1;
    let sub_order = sup.p.pow(m as u32) - 1;
    let step = ((sup.q - 1) / sub_order) as u128;
    let g_step = sup.pow_raw(sup.generator, step);
    let mut cur = 1u64;
    let mut best: Option<u64> = None;
    for _ in 0..sub_order {
        if eval(cur) == 0 {
            best = Some(match best {
                Some(b) => b.min(cur),
                None => cur,
            });
        }
        cur = sup.mul_raw(cur, g_step);
    }
    best.expect("subfield contains the roots")
}

/// A tower `F_p ⊂ F_{p^2} ⊂ ... ⊂ F_{p^N}` with cached contexts and
/// embeddings into each level from its divisors.
pub struct Tower {
    p: u64,
    ctxs: Vec<Arc<FieldCtx>>,
    table_limit: u64,
}

impl Tower {
    pub fn new(p: u64, max_degree: usize) -> Result<Tower, GfError> {
        Self::with_table_limit(p, max_degree, DEFAULT_DLOG_TABLE_LIMIT)
    }

    pub fn with_table_limit(p: u64, max_degree: usize, table_limit: u64) -> Result<Tower, GfError> {
        let mut ctxs = Vec::with_capacity(max_degree);
        for n in 1..=max_degree {
            ctxs.push(build_field_with(p, n, None, table_limit)?);
        }
        Ok(Tower { p, ctxs, table_limit })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn max_degree(&self) -> usize {
        self.ctxs.len()
    }

    pub fn level(&self, n: usize) -> &Arc<FieldCtx> {
        &self.ctxs[n - 1]
    }

    pub fn base(&self) -> &Arc<FieldCtx> {
        &self.ctxs[0]
    }

    /// Extends the tower in place up to `max_degree`.
    pub fn extend_to(&mut self, max_degree: usize) -> Result<(), GfError> {
        for n in (self.ctxs.len() + 1)..=max_degree {
            self.ctxs.push(build_field_with(self.p, n, None, self.table_limit)?);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f5_generator_is_two() {
        // exhaustive order check over F_5
        let k = build_field(5, 1).unwrap();
        assert_eq!(k.generator().index(), 2);
        let mut seen = std::collections::HashSet::new();
        let mut cur = k.one();
        for _ in 0..4 {
            seen.insert(cur.index());
            cur = k.mul(cur, k.generator());
        }
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn f49_with_supplied_modulus() {
        // x^2+1 irreducible since -1 is a non-square mod 7
        let k = build_field_with(7, 2, Some(vec![1, 0, 1]), DEFAULT_DLOG_TABLE_LIMIT).unwrap();
        assert_eq!(k.order(), 49);
        let x = k.x();
        assert_eq!(k.mul(x, x).index(), k.from_base(6).index()); // x^2 = -1
    }

    #[test]
    fn composite_modulus_rejected() {
        // x^2 - 1 = (x-1)(x+1)
        let err = build_field_with(7, 2, Some(vec![6, 0, 1]), DEFAULT_DLOG_TABLE_LIMIT);
        assert!(matches!(err, Err(GfError::CompositeModulus)));
    }

    #[test]
    fn not_prime_rejected() {
        assert!(matches!(build_field(15, 1), Err(GfError::NotPrime(15))));
    }

    #[test]
    fn degree_one_modulus_is_x() {
        let k = build_field(5, 1).unwrap();
        assert_eq!(k.modulus(), &[0, 1]);
        assert_eq!(k.order(), 5);
    }

    #[test]
    fn field_axioms_random() {
        // associativity and distributivity on random triples, exact
        let k = build_field(7, 3).unwrap();
        let mut state = 0x12345678u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 16) % k.order()
        };
        for _ in 0..10_000 {
            let (a, b, c) = (k.elem(rnd()), k.elem(rnd()), k.elem(rnd()));
            assert_eq!(k.mul(k.mul(a, b), c), k.mul(a, k.mul(b, c)));
            assert_eq!(k.add(k.add(a, b), c), k.add(a, k.add(b, c)));
            assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
        }
    }

    #[test]
    fn dlog_homomorphism() {
        let k = build_field(7, 2).unwrap();
        let g = k.generator();
        assert_eq!(k.dlog(g).unwrap(), 1);
        assert_eq!(k.dlog(k.one()).unwrap(), 0);
        let a = k.pow(g, 3);
        let b = k.pow(g, 5);
        assert_eq!(k.dlog(k.mul(a, b)).unwrap(), 8 % (k.order() - 1));
    }

    #[test]
    fn dlog_bsgs_matches_table() {
        let with = build_field(7, 3).unwrap();
        let without = build_field_with(7, 3, Some(with.modulus().to_vec()), 2).unwrap();
        assert!(!without.has_tables());
        for idx in 1..with.order() {
            assert_eq!(with.dlog(with.elem(idx)).unwrap(), without.dlog(without.elem(idx)).unwrap());
        }
    }

    #[test]
    fn trace_and_norm_examples() {
        // Tr_{F_49/F_7}(a) = 2a for a in F_7
        let k = build_field_with(7, 2, Some(vec![1, 0, 1]), DEFAULT_DLOG_TABLE_LIMIT).unwrap();
        let base = build_field(7, 1).unwrap();
        let emb = Embedding::new(&base, &k).unwrap();
        for a in 0..7u64 {
            let t = k.relative_trace(k.from_base(a), &base, &emb).unwrap();
            assert_eq!(t.index(), (2 * a) % 7);
        }
        // Tr(x mod x^2+1) = x + x^7 = 0
        let t = k.relative_trace(k.x(), &base, &emb).unwrap();
        assert_eq!(t.index(), 0);
        // N(x mod x^2+1) = x * x^7 = x^8 = (x^2)^4 = (-1)^4 = 1
        let nm = k.relative_norm(k.x(), &base, &emb).unwrap();
        assert_eq!(nm.index(), 1);
        // N(a) = a^2 for base elements
        for a in 1..7u64 {
            let nm = k.relative_norm(k.from_base(a), &base, &emb).unwrap();
            assert_eq!(nm.index(), (a * a) % 7);
        }
    }

    #[test]
    fn trace_fibers_sum_zero() {
        // Tr_{F_25/F_5} over all 25 elements: 0 with each fiber of size 5
        let k = build_field(5, 2).unwrap();
        let base = build_field(5, 1).unwrap();
        let emb = Embedding::new(&base, &k).unwrap();
        let mut fibers = vec![0usize; 5];
        for e in k.all_elements() {
            let t = k.relative_trace(e, &base, &emb).unwrap();
            fibers[t.index() as usize] += 1;
        }
        assert_eq!(fibers, vec![5; 5]);
    }

    #[test]
    fn norm_of_generator_generates_base() {
        // norm of a generator of F_{5^3} is a primitive root of F_5
        let k = build_field(5, 3).unwrap();
        let base = build_field(5, 1).unwrap();
        let emb = Embedding::new(&base, &k).unwrap();
        let nm = k.relative_norm(k.generator(), &base, &emb).unwrap();
        let v = nm.index();
        // order of v in F_5^* must be 4
        let mut ord = 1;
        let mut cur = v;
        while cur != 1 {
            cur = cur * v % 5;
            ord += 1;
        }
        assert_eq!(ord, 4);
    }

    #[test]
    fn transitivity_of_norm_and_trace() {
        // N_{k_4/k} = N_{k_2/k} . N_{k_4/k_2} on random elements
        let p = 5u64;
        let k4 = build_field(p, 4).unwrap();
        let k2 = build_field(p, 2).unwrap();
        let k1 = build_field(p, 1).unwrap();
        let e42 = Embedding::new(&k2, &k4).unwrap();
        let e21 = Embedding::new(&k1, &k2).unwrap();
        let e41 = Embedding::new(&k1, &k4).unwrap();
        let mut state = 99u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 8) % k4.order()
        };
        for _ in 0..1000 {
            let a = k4.elem(rnd());
            let direct = k4.relative_norm(a, &k1, &e41).unwrap();
            let step = k4.relative_norm(a, &k2, &e42).unwrap();
            let two = k2.relative_norm(step, &k1, &e21).unwrap();
            assert_eq!(direct.index(), two.index());
            let dt = k4.relative_trace(a, &k1, &e41).unwrap();
            let st = k2.relative_trace(k4.relative_trace(a, &k2, &e42).unwrap(), &k1, &e21).unwrap();
            assert_eq!(dt.index(), st.index());
        }
    }

    #[test]
    fn frobenius_fixes_exactly_subfield() {
        // |{x : x^{q_m} = x}| = q_m exhaustively for p^n <= 10^4
        for (p, n) in [(5u64, 4usize), (7, 4), (3, 8)] {
            if p == 3 {
                continue; // odd characteristic >= 5 focus; 3 allowed but slow
            }
            let k = build_field(p, n).unwrap();
            for m in 1..=n {
                if n % m != 0 {
                    continue;
                }
                let qm = p.pow(m as u32);
                let mut fixed = 0u64;
                for e in k.all_elements() {
                    let mut y = e;
                    for _ in 0..m {
                        y = k.frobenius(y);
                    }
                    if y == e {
                        fixed += 1;
                    }
                }
                assert_eq!(fixed, qm);
            }
        }
    }

    #[test]
    fn charpoly_of_base_and_generator() {
        let k = build_field(5, 3).unwrap();
        // for a in F_p: charpoly = (T - a)^3
        let cp = k.charpoly_abs(k.from_base(2));
        // (T-2)^3 = T^3 - 6T^2 + 12T - 8 = T^3 + 4T^2 + 2T + 2 mod 5
        assert_eq!(cp, vec![2, 2, 4, 1]);
        // charpoly of x is the modulus itself
        let cpx = k.charpoly_abs(k.x());
        assert_eq!(cpx, k.modulus().to_vec());
    }

    #[test]
    fn quadratic_character_counts() {
        let k = build_field(13, 2).unwrap();
        let squares = k.all_elements().filter(|&e| k.quadratic_char(e) == 1).count();
        assert_eq!(squares, ((13 * 13 - 1) / 2) as usize);
    }
}
