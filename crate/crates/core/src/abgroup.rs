//! Structure discovery for finite abelian groups given as black boxes,
//! their character groups, and exact root-of-unity character values.
//!
//! A group is handed over as an order, a composition handle, and an
//! enumeration handle.  Discovery produces an invariant-factor
//! presentation `Z/d_1 x ... x Z/d_k` with `d_i | d_{i+1}`, generators,
//! and encode/decode maps between opaque element handles and exponent
//! vectors.  Characters are dual exponent vectors; their values are kept
//! as exact rational angles until the statistics stage.

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::gf::ctx::factorize_u64;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("group is not abelian: witness pair ({0}, {1})")]
    NotAbelian(u64, u64),
    #[error("enumeration produced {got} elements, expected {want}")]
    OrderMismatch { got: u64, want: u64 },
    #[error("character belongs to a different group")]
    WrongGroup,
    #[error("element handle is not a group member")]
    UnknownElement,
}

/// Exact root of unity `e(a/n)` with the angle kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    num: u64,
    den: u64,
}

impl RootOfUnity {
    pub fn new(num: i64, den: u64) -> RootOfUnity {
        assert!(den > 0);
        let num = num.rem_euclid(den as i64) as u64;
        let g = gcd(num, den);
        RootOfUnity { num: num / g, den: den / g }
    }

    pub const ONE: RootOfUnity = RootOfUnity { num: 0, den: 1 };

    pub fn is_one(self) -> bool {
        self.num == 0
    }

    /// Angle as the reduced fraction (numerator, denominator).
    pub fn angle(self) -> (u64, u64) {
        (self.num, self.den)
    }

    /// Exact product: add angles as rationals.
    pub fn mul(self, other: RootOfUnity) -> RootOfUnity {
        let den = lcm(self.den, other.den);
        let num = (self.num as u128 * (den / self.den) as u128
            + other.num as u128 * (den / other.den) as u128)
            % den as u128;
        let g = gcd(num as u64, den);
        RootOfUnity { num: num as u64 / g, den: den / g }
    }

    pub fn conj(self) -> RootOfUnity {
        if self.num == 0 {
            self
        } else {
            RootOfUnity { num: self.den - self.num, den: self.den }
        }
    }

    pub fn pow(self, e: u64) -> RootOfUnity {
        let num = (self.num as u128 * e as u128) % self.den as u128;
        let g = gcd(num as u64, self.den);
        RootOfUnity { num: num as u64 / g, den: self.den / g }
    }

    /// Complex rendering, accurate to within an ulp of the angle.
    pub fn value(self) -> Complex64 {
        let theta = 2.0 * std::f64::consts::PI * (self.num as f64) / (self.den as f64);
        Complex64::new(theta.cos(), theta.sin())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Black-box interface handed to `discover_structure`.
pub struct BlackBoxGroup<'a> {
    pub order: u64,
    /// composition `x * y` on opaque handles
    pub op: &'a dyn Fn(u64, u64) -> u64,
    /// identity handle
    pub identity: u64,
    /// full enumeration of element handles
    pub elements: &'a dyn Fn() -> Vec<u64>,
}

fn pow_bb(op: &dyn Fn(u64, u64) -> u64, identity: u64, x: u64, mut e: u64) -> u64 {
    let mut r = identity;
    let mut b = x;
    while e > 0 {
        if e & 1 == 1 {
            r = op(r, b);
        }
        b = op(b, b);
        e >>= 1;
    }
    r
}

/// Invariant-factor presentation of a finite abelian group.  Element
/// handles are the caller's opaque `u64`s.
pub struct AbelianGroupStructure {
    /// Invariant factors `d_1 | d_2 | ... | d_k` (trivial factors
    /// dropped; the trivial group has an empty list).
    invariant_factors: Vec<u64>,
    /// Generator handles, one per invariant factor.
    generators: Vec<u64>,
    order: u64,
    /// flat exponent index -> element handle
    decode: Vec<u64>,
    /// element handle -> flat exponent index
    encode: HashMap<u64, u64>,
    /// strides for flattening exponent vectors (lexicographic order)
    strides: Vec<u64>,
}

/// Discovers the invariant-factor structure of a finite abelian black-box
/// group: enumerate elements, compute orders, greedily extract a
/// maximal-order cyclic factor, quotient, recurse.
///
/// Verified on exit: the generators span a set of the right cardinality
/// (the decode table is built by full span enumeration and collisions are
/// rejected) and `encode`/`decode` invert each other by construction.
pub fn discover_structure(bb: &BlackBoxGroup<'_>) -> Result<AbelianGroupStructure, GroupError> {
    let elements = (bb.elements)();
    if elements.len() as u64 != bb.order {
        return Err(GroupError::OrderMismatch { got: elements.len() as u64, want: bb.order });
    }
    // commutativity check on a deterministic sample (~10^5 pairs)
    let step = (elements.len() / 316).max(1);
    let sample: Vec<u64> = elements.iter().step_by(step).copied().collect();
    for &a in &sample {
        for &b in &sample {
            if (bb.op)(a, b) != (bb.op)(b, a) {
                return Err(GroupError::NotAbelian(a, b));
            }
        }
    }

    let order_facs = factorize_u64(bb.order);
    let elem_order = |x: u64| -> u64 {
        let mut ord = bb.order;
        for &(pr, e) in &order_facs {
            for _ in 0..e {
                let cand = ord / pr;
                if pow_bb(bb.op, bb.identity, x, cand) == bb.identity {
                    ord = cand;
                } else {
                    break;
                }
            }
        }
        ord
    };

    // Greedy extraction in successive quotients.  `class_of` maps each
    // element to the canonical key of its class in the current quotient.
    let mut gens: Vec<u64> = Vec::new();
    let mut gen_orders: Vec<u64> = Vec::new();
    let mut class_of: HashMap<u64, u64> = elements.iter().map(|&e| (e, e)).collect();
    let mut class_reps: Vec<u64> = elements.clone();

    loop {
        let trivial = class_of[&bb.identity];
        let quotient_order = |rep: u64, class_of: &HashMap<u64, u64>| -> u64 {
            let full = elem_order(rep);
            let mut best = full;
            for &(pr, e) in &factorize_u64(full) {
                for _ in 0..e {
                    let cand = best / pr;
                    if class_of[&pow_bb(bb.op, bb.identity, rep, cand)] == trivial {
                        best = cand;
                    } else {
                        break;
                    }
                }
            }
            best
        };
        let mut best: Option<(u64, u64)> = None;
        for &rep in &class_reps {
            let o = quotient_order(rep, &class_of);
            match best {
                Some((bo, brep)) => {
                    if o > bo || (o == bo && rep < brep) {
                        best = Some((o, rep));
                    }
                }
                None => best = Some((o, rep)),
            }
        }
        let (qord, rep) = best.expect("group is nonempty");
        if qord == 1 {
            break;
        }
        gens.push(rep);
        gen_orders.push(qord);

        // collapse by the subgroup generated by rep's class
        let rep_pows: Vec<u64> = {
            let mut v = Vec::with_capacity(qord as usize);
            let mut cur = bb.identity;
            for _ in 0..qord {
                v.push(cur);
                cur = (bb.op)(cur, rep);
            }
            v
        };
        let mut canon_of_class: HashMap<u64, u64> = HashMap::new();
        let mut new_class_of: HashMap<u64, u64> = HashMap::with_capacity(class_of.len());
        for &e in &elements {
            let cls = class_of[&e];
            let canon = *canon_of_class.entry(cls).or_insert_with(|| {
                rep_pows
                    .iter()
                    .map(|&rp| class_of[&(bb.op)(e, rp)])
                    .min()
                    .unwrap()
            });
            new_class_of.insert(e, canon);
        }
        class_of = new_class_of;
        let mut seen = std::collections::HashSet::new();
        class_reps = elements
            .iter()
            .filter(|&&e| seen.insert(class_of[&e]))
            .copied()
            .collect();
    }

    // Lift generators so the order in G matches the quotient order:
    // g^{d} lies in the span of the earlier generators and is divisible
    // by d there (split extension for abelian groups).
    let span_dlog = |gens: &[u64], orders: &[u64], target: u64| -> Option<Vec<u64>> {
        let mut table: HashMap<u64, Vec<u64>> = HashMap::new();
        table.insert(bb.identity, vec![0u64; gens.len()]);
        let mut frontier: Vec<(u64, Vec<u64>)> = vec![(bb.identity, vec![0u64; gens.len()])];
        for (i, (&g, &o)) in gens.iter().zip(orders.iter()).enumerate() {
            let mut next = Vec::with_capacity(frontier.len() * o as usize);
            for (e, v) in &frontier {
                let mut cur = *e;
                for pw in 0..o {
                    if pw > 0 {
                        cur = (bb.op)(cur, g);
                    }
                    let mut vv = v.clone();
                    vv[i] = pw;
                    table.entry(cur).or_insert_with(|| vv.clone());
                    next.push((cur, vv));
                }
            }
            frontier = next;
        }
        table.get(&target).cloned()
    };

    let mut lifted: Vec<u64> = Vec::new();
    let mut lifted_orders: Vec<u64> = Vec::new();
    for (i, (&g, &d)) in gens.iter().zip(gen_orders.iter()).enumerate() {
        if i == 0 {
            lifted.push(g);
            lifted_orders.push(d);
            continue;
        }
        let excess = pow_bb(bb.op, bb.identity, g, d);
        let expo = span_dlog(&lifted, &lifted_orders, excess)
            .expect("excess lies in the span of earlier generators");
        let mut corrected = g;
        for (j, &e) in expo.iter().enumerate() {
            if e == 0 {
                continue;
            }
            debug_assert_eq!(e % d, 0, "abelian extensions split");
            let s = (lifted_orders[j] - (e / d) % lifted_orders[j]) % lifted_orders[j];
            corrected = (bb.op)(corrected, pow_bb(bb.op, bb.identity, lifted[j], s));
        }
        debug_assert_eq!(pow_bb(bb.op, bb.identity, corrected, d), bb.identity);
        lifted.push(corrected);
        lifted_orders.push(d);
    }

    // ascending divisibility order
    let mut pairs: Vec<(u64, u64)> = lifted_orders.into_iter().zip(lifted).collect();
    pairs.reverse();
    let invariant_factors: Vec<u64> = pairs.iter().map(|p| p.0).collect();
    let generators: Vec<u64> = pairs.iter().map(|p| p.1).collect();
    for w in invariant_factors.windows(2) {
        debug_assert_eq!(w[1] % w[0], 0, "invariant factors must divide in turn");
    }
    let span: u64 = invariant_factors.iter().product::<u64>().max(1);
    if span != bb.order {
        return Err(GroupError::OrderMismatch { got: span, want: bb.order });
    }

    build_tables(invariant_factors, generators, bb.identity, bb.op)
}

fn build_tables(
    invariant_factors: Vec<u64>,
    generators: Vec<u64>,
    identity: u64,
    op: &dyn Fn(u64, u64) -> u64,
) -> Result<AbelianGroupStructure, GroupError> {
    let span: u64 = invariant_factors.iter().product::<u64>().max(1);
    let mut strides = vec![1u64; invariant_factors.len()];
    for i in (0..invariant_factors.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * invariant_factors[i + 1];
    }
    let mut decode = vec![identity; span as usize];
    for (i, (&g, &d)) in generators.iter().zip(invariant_factors.iter()).enumerate() {
        let block = strides[i] as usize;
        let reps = span as usize / (block * d as usize);
        let mut powers = Vec::with_capacity(d as usize);
        let mut cur = identity;
        for _ in 0..d {
            powers.push(cur);
            cur = op(cur, g);
        }
        let mut idx = 0usize;
        for _ in 0..reps {
            for &pw in &powers {
                for _ in 0..block {
                    decode[idx] = op(decode[idx], pw);
                    idx += 1;
                }
            }
        }
    }
    let mut encode = HashMap::with_capacity(span as usize);
    for (flat, &e) in decode.iter().enumerate() {
        if encode.insert(e, flat as u64).is_some() {
            return Err(GroupError::OrderMismatch { got: flat as u64, want: span });
        }
    }
    Ok(AbelianGroupStructure { invariant_factors, generators, order: span, decode, encode, strides })
}

impl AbelianGroupStructure {
    /// Builds the structure from a known product-of-cyclic presentation:
    /// factor orders with matching generator handles.  The factors need
    /// not satisfy divisibility; they are normalized prime-by-prime into
    /// invariant factors.
    pub fn from_cyclic_product(
        factor_orders: &[u64],
        identity: u64,
        generators: &[u64],
        op: &dyn Fn(u64, u64) -> u64,
    ) -> AbelianGroupStructure {
        assert_eq!(factor_orders.len(), generators.len());
        let mut all_primes: Vec<u64> = Vec::new();
        let facs: Vec<Vec<(u64, u32)>> = factor_orders
            .iter()
            .map(|&d| {
                let f = factorize_u64(d);
                for &(p, _) in &f {
                    if !all_primes.contains(&p) {
                        all_primes.push(p);
                    }
                }
                f
            })
            .collect();
        all_primes.sort_unstable();
        let k = factor_orders.len();
        // slot 0 collects the largest p-part of every prime
        let mut slot_orders = vec![1u64; k.max(1)];
        let mut slot_sources: Vec<Vec<(u64, usize)>> = vec![Vec::new(); k.max(1)];
        for &p in &all_primes {
            let mut parts: Vec<(u64, usize)> = Vec::new();
            for (i, f) in facs.iter().enumerate() {
                if let Some(&(_, e)) = f.iter().find(|&&(q, _)| q == p) {
                    parts.push((p.pow(e), i));
                }
            }
            parts.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            for (slot, &(pe, src)) in parts.iter().enumerate() {
                slot_orders[slot] *= pe;
                slot_sources[slot].push((pe, src));
            }
        }
        let mut slot_gens = vec![identity; k.max(1)];
        for (slot, parts) in slot_sources.iter().enumerate() {
            for &(pe, src) in parts {
                let cof = factor_orders[src] / pe;
                slot_gens[slot] = op(slot_gens[slot], pow_bb(op, identity, generators[src], cof));
            }
        }
        let mut pairs: Vec<(u64, u64)> = slot_orders
            .into_iter()
            .zip(slot_gens)
            .filter(|&(d, _)| d > 1)
            .collect();
        pairs.sort_by_key(|&(d, _)| d);
        let invariant_factors: Vec<u64> = pairs.iter().map(|p| p.0).collect();
        let generators: Vec<u64> = pairs.iter().map(|p| p.1).collect();
        build_tables(invariant_factors, generators, identity, op)
            .expect("cyclic-product presentation must be faithful")
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    /// Exponent vector of an element handle.
    pub fn encode(&self, elem: u64) -> Result<Vec<u64>, GroupError> {
        Ok(self.unflatten(self.encode_flat(elem)?))
    }

    /// Flat index of an element (lexicographic exponent order).
    pub fn encode_flat(&self, elem: u64) -> Result<u64, GroupError> {
        self.encode.get(&elem).copied().ok_or(GroupError::UnknownElement)
    }

    /// Element handle for an exponent vector.
    pub fn decode(&self, expo: &[u64]) -> u64 {
        self.decode[self.flatten(expo) as usize]
    }

    pub fn decode_flat(&self, flat: u64) -> u64 {
        self.decode[flat as usize]
    }

    pub fn flatten(&self, expo: &[u64]) -> u64 {
        assert_eq!(expo.len(), self.invariant_factors.len());
        expo.iter()
            .zip(&self.invariant_factors)
            .zip(&self.strides)
            .map(|((&e, &d), &s)| (e % d) * s)
            .sum()
    }

    pub fn unflatten(&self, flat: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.invariant_factors.len());
        let mut t = flat;
        for (&d, &s) in self.invariant_factors.iter().zip(&self.strides) {
            out.push((t / s) % d);
            t %= s;
        }
        out
    }

    /// All characters in deterministic order (lexicographic dual exponent
    /// vectors); the first is the trivial character.
    pub fn all_characters(&self) -> Vec<Character> {
        (0..self.order).map(|flat| self.character_from_flat(flat)).collect()
    }

    pub fn character_from_flat(&self, flat: u64) -> Character {
        let expo = self.unflatten(flat);
        let order = expo
            .iter()
            .zip(&self.invariant_factors)
            .map(|(&c, &d)| d / gcd(c, d))
            .fold(1u64, lcm);
        Character {
            expo,
            order,
            group_order: self.order,
            invariant_factors: self.invariant_factors.clone(),
        }
    }

    pub fn character(&self, expo: &[u64]) -> Character {
        self.character_from_flat(self.flatten(expo))
    }

    /// Exact character evaluation on an element handle.
    pub fn eval_char(&self, chi: &Character, elem: u64) -> Result<RootOfUnity, GroupError> {
        if chi.invariant_factors != self.invariant_factors || chi.group_order != self.order {
            return Err(GroupError::WrongGroup);
        }
        Ok(chi.eval_expo(&self.encode(elem)?))
    }
}

/// A character of a finite abelian group in invariant-factor coordinates:
/// the dual exponent vector `(c_1, ..., c_k)` with `c_i mod d_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    expo: Vec<u64>,
    order: u64,
    group_order: u64,
    invariant_factors: Vec<u64>,
}

impl Character {
    pub fn exponents(&self) -> &[u64] {
        &self.expo
    }

    /// Order of the character: lcm of component orders.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.expo.iter().all(|&c| c == 0)
    }

    /// `chi(g)` for `g` in exponent coordinates: `e(sum c_i e_i / d_i)`.
    pub fn eval_expo(&self, expo: &[u64]) -> RootOfUnity {
        let mut acc = RootOfUnity::ONE;
        for ((&c, &e), &d) in self.expo.iter().zip(expo).zip(&self.invariant_factors) {
            if c != 0 && e % d != 0 {
                let num = (c as u128 * (e % d) as u128 % d as u128) as u64;
                acc = acc.mul(RootOfUnity::new(num as i64, d));
            }
        }
        acc
    }

    pub fn conj(&self) -> Character {
        let expo = self
            .expo
            .iter()
            .zip(&self.invariant_factors)
            .map(|(&c, &d)| (d - c % d) % d)
            .collect();
        Character {
            expo,
            order: self.order,
            group_order: self.group_order,
            invariant_factors: self.invariant_factors.clone(),
        }
    }
}

/// Exact zero test for a sum of roots of unity `sum_k counts[k] e(k/n)`:
/// reduce the integer polynomial modulo the `n`-th cyclotomic polynomial.
pub fn cyclotomic_sum_is_zero(counts: &[i64], n: u64) -> bool {
    assert_eq!(counts.len() as u64, n);
    let phi = cyclotomic_poly(n);
    let mut rem: Vec<i64> = counts.to_vec();
    while rem.last() == Some(&0) {
        rem.pop();
    }
    let d = phi.len() - 1;
    while rem.len() > d {
        let lead = *rem.last().unwrap();
        rem.pop();
        let pos = rem.len();
        if lead != 0 {
            for (i, &c) in phi.iter().enumerate().take(d) {
                rem[pos - d + i] -= lead * c;
            }
        }
        while rem.last() == Some(&0) {
            rem.pop();
        }
    }
    rem.iter().all(|&c| c == 0)
}

/// Integer coefficients of the `n`-th cyclotomic polynomial, via division
/// of `x^n - 1` by the cyclotomic polynomials of proper divisors.
fn cyclotomic_poly(n: u64) -> Vec<i64> {
    fn divide_exact(num: &mut Vec<i64>, den: &[i64]) {
        let mut out = vec![0i64; num.len() - den.len() + 1];
        let mut rem = std::mem::take(num);
        let dd = den.len() - 1;
        while rem.len() > dd {
            let lead = *rem.last().unwrap();
            let pos = rem.len() - 1 - dd;
            out[pos] = lead;
            for (i, &c) in den.iter().enumerate() {
                rem[pos + i] -= lead * c;
            }
            while rem.last() == Some(&0) {
                rem.pop();
            }
        }
        assert!(rem.iter().all(|&c| c == 0), "cyclotomic division must be exact");
        *num = out;
    }
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_poly(d);
            divide_exact(&mut poly, &phi_d);
        }
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::build_field;

    #[test]
    fn root_of_unity_exact_arithmetic() {
        let a = RootOfUnity::new(1, 6);
        let b = RootOfUnity::new(1, 4);
        assert_eq!(a.mul(b), RootOfUnity::new(5, 12));
        assert_eq!(a.mul(a.conj()), RootOfUnity::ONE);
        assert_eq!(a.pow(6), RootOfUnity::ONE);
    }

    fn cyclic_bb(order: u64) -> AbelianGroupStructure {
        let op = move |a: u64, b: u64| (a + b) % order;
        let elements = move || (0..order).collect::<Vec<_>>();
        let bb = BlackBoxGroup { order, op: &op, identity: 0, elements: &elements };
        discover_structure(&bb).unwrap()
    }

    #[test]
    fn f7_units_are_cyclic_z6() {
        let k = build_field(7, 1).unwrap();
        let op = |a: u64, b: u64| k.mul(k.elem(a), k.elem(b)).index();
        let elements = || (1..7u64).collect::<Vec<_>>();
        let bb = BlackBoxGroup { order: 6, op: &op, identity: 1, elements: &elements };
        let s = discover_structure(&bb).unwrap();
        assert_eq!(s.invariant_factors(), &[6]);
        assert_eq!(s.generators().len(), 1);
    }

    #[test]
    fn gm_times_ga_f5_is_z20() {
        // F_5^x x F_5 = Z/4 x Z/5 = Z/20 (coprime orders)
        let k = build_field(5, 1).unwrap();
        let op = move |a: u64, b: u64| {
            let (am, aa) = (a >> 8, a & 0xff);
            let (bm, ba) = (b >> 8, b & 0xff);
            (k.mul(k.elem(am), k.elem(bm)).index() << 8) | ((aa + ba) % 5)
        };
        let elements = || {
            let mut v = Vec::new();
            for m in 1..5u64 {
                for a in 0..5u64 {
                    v.push((m << 8) | a);
                }
            }
            v
        };
        let bb = BlackBoxGroup { order: 20, op: &op, identity: 1 << 8, elements: &elements };
        let s = discover_structure(&bb).unwrap();
        assert_eq!(s.invariant_factors(), &[20]);
    }

    #[test]
    fn klein_style_two_factor_group() {
        // Z/2 x Z/4 keeps two invariant factors
        let op = |a: u64, b: u64| {
            let (a1, a2) = (a >> 4, a & 0xf);
            let (b1, b2) = (b >> 4, b & 0xf);
            (((a1 + b1) % 2) << 4) | ((a2 + b2) % 4)
        };
        let elements = || {
            let mut v = Vec::new();
            for x in 0..2u64 {
                for y in 0..4u64 {
                    v.push((x << 4) | y);
                }
            }
            v
        };
        let bb = BlackBoxGroup { order: 8, op: &op, identity: 0, elements: &elements };
        let s = discover_structure(&bb).unwrap();
        assert_eq!(s.invariant_factors(), &[2, 4]);
        for flat in 0..8u64 {
            let e = s.decode_flat(flat);
            assert_eq!(s.encode_flat(e).unwrap(), flat);
        }
    }

    #[test]
    fn non_abelian_rejected_with_witness() {
        // S_3 written as permutation indices 0..5
        let perms: Vec<[u8; 3]> =
            vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let compose = |a: u64, b: u64| -> u64 {
            let (pa, pb) = (perms[a as usize], perms[b as usize]);
            let c = [pa[pb[0] as usize], pa[pb[1] as usize], pa[pb[2] as usize]];
            perms.iter().position(|&p| p == c).unwrap() as u64
        };
        let elements = || (0..6u64).collect::<Vec<_>>();
        let bb = BlackBoxGroup { order: 6, op: &compose, identity: 0, elements: &elements };
        assert!(matches!(discover_structure(&bb), Err(GroupError::NotAbelian(_, _))));
    }

    #[test]
    fn characters_count_and_orthogonality_exact() {
        let s = cyclic_bb(6);
        let chars = s.all_characters();
        assert_eq!(chars.len(), 6);
        assert!(chars[0].is_trivial());
        let chi = &chars[1];
        for e in 0..6u64 {
            assert_eq!(chi.eval_expo(&[e]), RootOfUnity::new(e as i64, 6));
        }
        // orthogonality exactly in root-of-unity arithmetic
        for chi in &chars {
            let n = 6u64;
            let mut counts = vec![0i64; n as usize];
            for g in 0..6u64 {
                let (num, den) = chi.eval_expo(&[g]).angle();
                counts[(num * n / den) as usize] += 1;
            }
            let zero = cyclotomic_sum_is_zero(&counts, n);
            assert_eq!(zero, !chi.is_trivial());
        }
    }

    #[test]
    fn order_two_character_on_z4_generator() {
        let s = cyclic_bb(4);
        let chi = s.character(&[2]);
        assert_eq!(chi.order(), 2);
        // chi(generator) = e(2/4) = -1
        let v = chi.eval_expo(&[1]).value();
        assert!((v.re + 1.0).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn dual_orthogonality_and_double_count() {
        let s = AbelianGroupStructure::from_cyclic_product(&[4, 5], 0, &[5, 4], &|a, b| {
            (a + b) % 20
        });
        assert_eq!(s.invariant_factors(), &[20]);
        let chars = s.all_characters();
        assert_eq!(chars.len() as u64, s.order());
        for flat_g in 1..s.order() {
            let expo_g = s.unflatten(flat_g);
            let mut acc = Complex64::new(0.0, 0.0);
            for chi in &chars {
                acc += chi.eval_expo(&expo_g).value();
            }
            assert!(acc.norm() < 1e-9, "dual orthogonality failed at {flat_g}");
        }
    }

    #[test]
    fn multiplicativity_exact_on_random_pairs() {
        let s = cyclic_bb(360);
        let chi = s.character(&[77]);
        let mut state = 7u64;
        let mut rnd = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 7) % 360
        };
        for _ in 0..10_000 {
            let (g, h) = (rnd(), rnd());
            let lhs = chi.eval_expo(&[(g + h) % 360]);
            let rhs = chi.eval_expo(&[g]).mul(chi.eval_expo(&[h]));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn from_cyclic_product_normalizes_divisibility() {
        // Z/6 x Z/4 = Z/2 x Z/12
        let op = |a: u64, b: u64| {
            let (a1, a2) = (a / 10, a % 10);
            let (b1, b2) = (b / 10, b % 10);
            ((a1 + b1) % 6) * 10 + (a2 + b2) % 4
        };
        let s = AbelianGroupStructure::from_cyclic_product(&[6, 4], 0, &[10, 1], &op);
        assert_eq!(s.invariant_factors(), &[2, 12]);
        assert_eq!(s.order(), 24);
        for flat in 0..24u64 {
            assert_eq!(s.encode_flat(s.decode_flat(flat)).unwrap(), flat);
        }
    }

    #[test]
    fn cyclotomic_zero_tests() {
        assert!(cyclotomic_sum_is_zero(&[1, 1], 2));
        assert!(cyclotomic_sum_is_zero(&[1; 12], 12));
        let mut c = vec![0i64; 12];
        c[0] = 1;
        c[1] = 1;
        assert!(!cyclotomic_sum_is_zero(&c, 12));
    }
}
