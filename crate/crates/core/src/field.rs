//! Arithmetic in F_q for q = p^s.
//!
//! Elements are stored by their base-p positional encoding: the polynomial
//! `c_0 + c_1 x + ... + c_{s-1} x^{s-1}` is the integer `sum c_i p^i`. That
//! encoding is a bijection onto `[0, q)` and is the index used by every
//! table in the crate and in serialized output.
//!
//! Multiplication goes through discrete log/antilog tables built from the
//! primitive element; the tables themselves are filled with plain polynomial
//! arithmetic modulo the defining polynomial, which stays available as a
//! reference path (`mul_reference`).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field size accepted by [`Field::new`].
pub const MAX_FIELD_SIZE: u64 = 1 << 16;

/// A field element in canonical base-p encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(pub u32);

impl Element {
    pub const ZERO: Element = Element(0);
    pub const ONE: Element = Element(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serializable description of a field: characteristic, degree and the
/// coefficients `[c_0, .., c_s]` of the monic defining polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub s: u32,
    pub modulus: Vec<u32>,
}

impl FieldSpec {
    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.s)
    }
}

/// Deterministic primality by trial division; inputs here never exceed 2^32.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits `q` as `p^s` when it is a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    let factors = prime_factors(q);
    if factors.len() != 1 {
        return None;
    }
    let p = factors[0];
    let mut s = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        s += 1;
    }
    Some((p as u32, s))
}

/// Dense polynomials over F_p, low-degree coefficient first, kept trimmed
/// (no trailing zeros; the zero polynomial is empty).
pub(crate) mod poly {
    pub type Poly = Vec<u32>;

    pub fn trim(mut a: Poly) -> Poly {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn degree(a: &[u32]) -> Option<usize> {
        a.iter().rposition(|&c| c != 0)
    }

    fn inv_mod(a: u32, p: u32) -> u32 {
        // Fermat; p is prime.
        let mut base = a as u64 % p as u64;
        let mut e = p as u64 - 2;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p as u64;
            }
            base = base * base % p as u64;
            e >>= 1;
        }
        acc as u32
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Poly {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(out)
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        trim(out.into_iter().map(|c| c as u32).collect())
    }

    /// Quotient and remainder; `b` must be nonzero.
    pub fn divrem(a: &[u32], b: &[u32], p: u32) -> (Poly, Poly) {
        let db = degree(b).expect("division by zero polynomial");
        let lead_inv = inv_mod(b[db], p) as u64;
        let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
        let mut quot = vec![0u32; a.len().saturating_sub(db).max(1)];
        let pp = p as u64;
        while let Some(dr) = r.iter().rposition(|&c| c != 0) {
            if dr < db {
                break;
            }
            let coef = r[dr] * lead_inv % pp;
            let shift = dr - db;
            quot[shift] = coef as u32;
            for (j, &bc) in b.iter().enumerate().take(db + 1) {
                let sub = coef * bc as u64 % pp;
                r[shift + j] = (r[shift + j] + pp - sub) % pp;
            }
        }
        (trim(quot), trim(r.into_iter().map(|c| c as u32).collect()))
    }

    pub fn rem(a: &[u32], b: &[u32], p: u32) -> Poly {
        divrem(a, b, p).1
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Poly {
        rem(&mul(a, b, p), m, p)
    }

    pub fn powmod(a: &[u32], mut e: u64, m: &[u32], p: u32) -> Poly {
        let mut base = rem(a, m, p);
        let mut acc = rem(&[1], m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &base, m, p);
            }
            base = mulmod(&base, &base, m, p);
            e >>= 1;
        }
        acc
    }

    pub fn make_monic(a: Poly, p: u32) -> Poly {
        match degree(&a) {
            None => a,
            Some(d) => {
                let inv = inv_mod(a[d], p) as u64;
                a.into_iter().map(|c| (c as u64 * inv % p as u64) as u32).collect()
            }
        }
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Poly {
        let mut x = trim(a.to_vec());
        let mut y = trim(b.to_vec());
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        make_monic(x, p)
    }

    /// Inverse of `a` modulo `m` by the extended Euclidean algorithm, or
    /// `None` when they are not coprime.
    pub fn inv_modulo(a: &[u32], m: &[u32], p: u32) -> Option<Poly> {
        let (mut r0, mut r1) = (trim(m.to_vec()), rem(a, m, p));
        let (mut t0, mut t1): (Poly, Poly) = (Vec::new(), vec![1]);
        while !r1.is_empty() {
            let (qt, r2) = divrem(&r0, &r1, p);
            let t2 = sub(&t0, &mul(&qt, &t1, p), p);
            r0 = std::mem::replace(&mut r1, r2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        if degree(&r0) != Some(0) {
            return None;
        }
        let scale = inv_mod(r0[0], p) as u64;
        let t: Poly = t0.into_iter().map(|c| (c as u64 * scale % p as u64) as u32).collect();
        Some(rem(&t, m, p))
    }

    /// `x^(p^k) mod m`.
    pub fn frobenius_x(k: u32, m: &[u32], p: u32) -> Poly {
        let mut h = rem(&[0, 1], m, p);
        for _ in 0..k {
            h = powmod(&h, p as u64, m, p);
        }
        h
    }

    /// Rabin's irreducibility test for a monic polynomial of degree `s`.
    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let s = match degree(m) {
            Some(d) if d >= 1 => d as u32,
            _ => return false,
        };
        if s == 1 {
            return true;
        }
        let x = vec![0, 1];
        if sub(&frobenius_x(s, m, p), &rem(&x, m, p), p) != Vec::<u32>::new() {
            return false;
        }
        super::prime_factors(s as u64).into_iter().all(|r| {
            let h = frobenius_x(s / r as u32, m, p);
            let diff = sub(&h, &x, p);
            degree(&gcd(&diff, m, p)) == Some(0)
        })
    }

    /// Whether `m` has a root in F_p (a linear factor).
    #[cfg(test)]
    pub fn has_root(m: &[u32], p: u32) -> bool {
        (0..p).any(|r| {
            let mut acc = 0u64;
            for &c in m.iter().rev() {
                acc = (acc * r as u64 + c as u64) % p as u64;
            }
            acc == 0
        })
    }
}

/// The runtime field: validated spec plus precomputed log, antilog and
/// inverse tables. Immutable after construction, so it can be shared
/// freely between threads.
#[derive(Clone, Debug)]
pub struct Field {
    spec: FieldSpec,
    q: u32,
    primitive: Element,
    exp: Vec<u32>,
    log: Vec<u32>,
    inv: Vec<u32>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    /// Builds F_{p^s} over the lexicographically smallest monic irreducible
    /// polynomial of degree `s` (coefficients compared from `c_0` upward).
    pub fn new(p: u32, s: u32) -> Result<Self> {
        check_size(p, s)?;
        let modulus = smallest_irreducible(p, s);
        Self::build(FieldSpec { p, s, modulus })
    }

    /// Builds a field from an explicit spec, validating the modulus.
    pub fn from_spec(spec: FieldSpec) -> Result<Self> {
        check_size(spec.p, spec.s)?;
        let m = &spec.modulus;
        if m.len() != spec.s as usize + 1
            || m[spec.s as usize] != 1
            || m.iter().any(|&c| c >= spec.p)
            || !poly::is_irreducible(m, spec.p)
        {
            return Err(Error::BadModulus(spec.modulus));
        }
        Self::build(spec)
    }

    /// Field of prime-power order `q`, with the default modulus.
    pub fn with_order(q: u64) -> Result<Self> {
        let (p, s) = prime_power(q).ok_or_else(|| Error::InvalidInput(format!("{q} is not a prime power")))?;
        Self::new(p, s)
    }

    fn build(spec: FieldSpec) -> Result<Self> {
        let p = spec.p;
        let q = spec.order() as u32;
        let qm1 = (q - 1) as u64;
        let factors = prime_factors(qm1);
        let decode = |e: u32| -> Vec<u32> {
            let mut c = Vec::with_capacity(spec.s as usize);
            let mut v = e;
            for _ in 0..spec.s {
                c.push(v % p);
                v /= p;
            }
            poly::trim(c)
        };
        let encode = |c: &[u32]| -> u32 { c.iter().rev().fold(0u32, |acc, &d| acc * p + d) };
        let primitive = (1..q)
            .find(|&e| {
                let a = decode(e);
                factors.iter().all(|&r| poly::powmod(&a, qm1 / r, &spec.modulus, p) != vec![1])
            })
            .map(Element)
            .ok_or_else(|| Error::InvariantViolation("no primitive element found".into()))?;

        let g = decode(primitive.0);
        let mut exp = Vec::with_capacity(q as usize - 1);
        let mut log = vec![0u32; q as usize];
        let mut cur = vec![1u32];
        for i in 0..q - 1 {
            let e = encode(&cur);
            exp.push(e);
            log[e as usize] = i;
            cur = poly::mulmod(&cur, &g, &spec.modulus, p);
        }
        let mut inv = vec![0u32; q as usize];
        for e in 1..q {
            let t = poly::inv_modulo(&decode(e), &spec.modulus, p)
                .ok_or_else(|| Error::BadModulus(spec.modulus.clone()))?;
            inv[e as usize] = encode(&t);
        }
        Ok(Field { spec, q, primitive, exp, log, inv })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.spec.p
    }

    #[inline]
    pub fn s(&self) -> u32 {
        self.spec.s
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.q as usize
    }

    pub fn is_prime_field(&self) -> bool {
        self.spec.s == 1
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + Clone {
        (0..self.q).map(Element)
    }

    /// Nonzero elements in encoding order.
    pub fn units(&self) -> impl Iterator<Item = Element> + Clone {
        (1..self.q).map(Element)
    }

    pub fn element(&self, value: u64) -> Result<Element> {
        if value < self.q as u64 {
            Ok(Element(value as u32))
        } else {
            Err(Error::ElementOutOfRange { value, q: self.q as u64 })
        }
    }

    /// Integer lift of `0 <= n < p` into the prime subfield.
    pub fn from_int(&self, n: u64) -> Element {
        Element((n % self.spec.p as u64) as u32)
    }

    /// Polynomial-basis coefficients `[c_0, .., c_{s-1}]`.
    pub fn coeffs(&self, x: Element) -> Vec<u32> {
        let p = self.spec.p;
        let mut v = x.0;
        (0..self.spec.s)
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Element> {
        if coeffs.len() > self.spec.s as usize || coeffs.iter().any(|&c| c >= self.spec.p) {
            return Err(Error::InvalidInput(format!(
                "coefficients {coeffs:?} do not describe an element of F_{}",
                self.q
            )));
        }
        let p = self.spec.p;
        Ok(Element(coeffs.iter().rev().fold(0, |acc, &d| acc * p + d)))
    }

    #[inline]
    pub fn add(&self, a: Element, b: Element) -> Element {
        let p = self.spec.p;
        if self.spec.s == 1 {
            return Element((a.0 + b.0) % p);
        }
        if p == 2 {
            return Element(a.0 ^ b.0);
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0, 1);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Element(out)
    }

    #[inline]
    pub fn neg(&self, a: Element) -> Element {
        let p = self.spec.p;
        if self.spec.s == 1 {
            return Element((p - a.0) % p);
        }
        if p == 2 {
            return a;
        }
        let (mut x, mut out, mut place) = (a.0, 0, 1);
        while x > 0 {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        Element(out)
    }

    #[inline]
    pub fn sub(&self, a: Element, b: Element) -> Element {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        if a.0 == 0 || b.0 == 0 {
            return Element::ZERO;
        }
        let n = self.q - 1;
        let l = self.log[a.index()] + self.log[b.index()];
        Element(self.exp[(if l >= n { l - n } else { l }) as usize])
    }

    pub fn inv(&self, a: Element) -> Result<Element> {
        if a.is_zero() {
            Err(Error::ZeroInverse)
        } else {
            Ok(Element(self.inv[a.index()]))
        }
    }

    pub fn div(&self, a: Element, b: Element) -> Result<Element> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Element, e: u64) -> Element {
        if e == 0 {
            return Element::ONE;
        }
        if a.is_zero() {
            return Element::ZERO;
        }
        let n = (self.q - 1) as u64;
        let l = self.log[a.index()] as u64 * (e % n) % n;
        Element(self.exp[l as usize])
    }

    /// Multiplication by schoolbook polynomial product and reduction, kept
    /// as an independent check on the log tables.
    pub fn mul_reference(&self, a: Element, b: Element) -> Element {
        let p = self.spec.p;
        let prod = poly::mulmod(&poly::trim(self.coeffs(a)), &poly::trim(self.coeffs(b)), &self.spec.modulus, p);
        Element(prod.iter().rev().fold(0, |acc, &d| acc * p + d))
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, a: Element) -> Option<u64> {
        if a.is_zero() {
            return None;
        }
        let n = (self.q - 1) as u64;
        let mut ord = n;
        for r in prime_factors(n) {
            while ord.is_multiple_of(r) && self.pow(a, ord / r) == Element::ONE {
                ord /= r;
            }
        }
        Some(ord)
    }

    /// Smallest-encoding generator of the multiplicative group.
    pub fn primitive_element(&self) -> Element {
        self.primitive
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, x: Element) -> Element {
        self.pow(x, self.spec.p as u64)
    }

    /// Absolute trace `x + x^p + ... + x^(p^(s-1))`; always in the prime subfield.
    pub fn trace(&self, x: Element) -> Element {
        let mut acc = Element::ZERO;
        let mut conj = x;
        for _ in 0..self.spec.s {
            acc = self.add(acc, conj);
            conj = self.frobenius(conj);
        }
        acc
    }

    /// Elements fixed by `x -> x^(p^t)`: the subfield of order `p^t`.
    pub fn subfield_elements(&self, t: u32) -> Result<Vec<Element>> {
        if t == 0 || !self.spec.s.is_multiple_of(t) {
            return Err(Error::NotADivisor { t, s: self.spec.s });
        }
        let e = (self.spec.p as u64).pow(t);
        Ok(self.elements().filter(|&x| self.pow(x, e) == x).collect())
    }

    /// `c_0 + c_1 g + ... + c_{k-1} g^{k-1}` for all coefficient vectors in
    /// F_p^k, i.e. the F_p-span of the first `k` powers of `g`. Order follows
    /// the base-p counter over `(c_0, .., c_{k-1})`.
    pub fn power_span(&self, g: Element, k: u32) -> Vec<Element> {
        let p = self.spec.p as u64;
        let count = p.pow(k);
        let powers: Vec<Element> = (0..k).map(|i| self.pow(g, i as u64)).collect();
        (0..count)
            .map(|mut n| {
                let mut acc = Element::ZERO;
                for &b in &powers {
                    let c = self.from_int(n % p);
                    acc = self.add(acc, self.mul(c, b));
                    n /= p;
                }
                acc
            })
            .collect()
    }
}

fn check_size(p: u32, s: u32) -> Result<()> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    let q = (p as u64).checked_pow(s).unwrap_or(u64::MAX);
    if s == 0 || q > MAX_FIELD_SIZE {
        return Err(Error::UnsupportedFieldSize { p: p as u64, s, max: MAX_FIELD_SIZE });
    }
    Ok(())
}

/// Lexicographically smallest monic irreducible of degree `s`, comparing
/// `(c_0, c_1, .., c_{s-1})` as integer tuples.
fn smallest_irreducible(p: u32, s: u32) -> Vec<u32> {
    let total = (p as u64).pow(s);
    (0..total)
        .map(|n| {
            // c_0 is the most significant digit of the counter.
            let mut c = vec![0u32; s as usize + 1];
            let mut v = n;
            for i in (0..s as usize).rev() {
                c[i] = (v % p as u64) as u32;
                v /= p as u64;
            }
            c[s as usize] = 1;
            c
        })
        .find(|m| poly::is_irreducible(m, p))
        .expect("an irreducible polynomial of every degree exists")
}

/// An additive character `chi: (F_q, +) -> C^*`, tabulated.
#[derive(Clone, Debug)]
pub struct Character {
    q: u32,
    values: Vec<Complex64>,
}

impl Character {
    #[inline]
    pub fn value(&self, x: Element) -> Complex64 {
        self.values[x.index()]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn q(&self) -> u32 {
        self.q
    }
}

/// `chi(x) = exp(2 pi i Tr(x) / p)`.
pub fn additive_character(field: &Field) -> Character {
    let p = field.p() as f64;
    let values = field
        .elements()
        .map(|x| {
            let t = field.trace(x).0 as f64;
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t / p)
        })
        .collect();
    Character { q: field.q(), values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_moduli() {
        assert_eq!(Field::new(2, 1).unwrap().spec().modulus, vec![0, 1]);
        assert_eq!(Field::new(2, 2).unwrap().spec().modulus, vec![1, 1, 1]);
        assert_eq!(Field::new(3, 2).unwrap().spec().modulus, vec![1, 0, 1]);
    }

    #[test]
    fn f4_quadratic_is_unique_irreducible() {
        // x^2, x^2+1, x^2+x, x^2+x+1
        let cands = [[0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]];
        let irreducible: Vec<_> = cands.iter().filter(|m| poly::is_irreducible(&m[..], 2)).collect();
        assert_eq!(irreducible, vec![&[1, 1, 1]]);
    }

    #[test]
    fn rabin_agrees_with_root_test_for_small_degree() {
        for p in [2u32, 3, 5, 7] {
            for s in 2..=3u32 {
                let total = (p as u64).pow(s);
                for n in 0..total {
                    let mut m: Vec<u32> = (0..s).map(|i| ((n / (p as u64).pow(i)) % p as u64) as u32).collect();
                    m.push(1);
                    assert_eq!(poly::is_irreducible(&m, p), !poly::has_root(&m, p), "p={p} m={m:?}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Field::new(4, 1), Err(Error::NotPrime(4)));
        assert!(matches!(Field::new(2, 17), Err(Error::UnsupportedFieldSize { .. })));
        assert!(matches!(Field::new(3, 0), Err(Error::UnsupportedFieldSize { .. })));
        let bad = FieldSpec { p: 3, s: 2, modulus: vec![2, 0, 1] };
        assert!(matches!(Field::from_spec(bad), Err(Error::BadModulus(_))));
    }

    #[test]
    fn f4_generator_squares_to_g_plus_one() {
        let f = Field::new(2, 2).unwrap();
        let g = f.from_coeffs(&[0, 1]).unwrap();
        let g_plus_1 = f.from_coeffs(&[1, 1]).unwrap();
        assert_eq!(f.mul(g, g), g_plus_1);
        assert_eq!(f.mul_reference(g, g), g_plus_1);
    }

    #[test]
    fn primitive_elements() {
        assert_eq!(Field::new(2, 1).unwrap().primitive_element(), Element(1));
        assert_eq!(Field::new(5, 1).unwrap().primitive_element(), Element(2));
        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(f4.primitive_element(), Element(2));
        assert_eq!(f4.order_of(Element(2)), Some(3));
    }

    #[test]
    fn trace_examples() {
        let f7 = Field::new(7, 1).unwrap();
        assert!(f7.elements().all(|x| f7.trace(x) == x));
        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(f4.trace(Element(2)), Element::ONE);
        for (p, s) in [(2, 4), (3, 3), (5, 2)] {
            let f = Field::new(p, s).unwrap();
            assert!(f.elements().all(|x| f.trace(x).0 < p));
        }
    }

    #[test]
    fn character_examples() {
        let f2 = Field::new(2, 1).unwrap();
        let chi = additive_character(&f2);
        assert!((chi.value(Element(0)) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((chi.value(Element(1)) - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        let f3 = Field::new(3, 1).unwrap();
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((additive_character(&f3).value(Element(1)) - w).norm() < 1e-12);
        let f4 = Field::new(2, 2).unwrap();
        assert!((additive_character(&f4).value(Element(2)) + 1.0).norm() < 1e-12);
    }

    #[test]
    fn subfields() {
        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(f4.subfield_elements(1).unwrap(), vec![Element(0), Element(1)]);
        assert_eq!(f4.subfield_elements(2).unwrap().len(), 4);
        let f9 = Field::new(3, 2).unwrap();
        assert_eq!(f9.subfield_elements(1).unwrap(), vec![Element(0), Element(1), Element(2)]);
        assert_eq!(f9.subfield_elements(3), Err(Error::NotADivisor { t: 3, s: 2 }));
    }

    #[test]
    fn zero_has_no_inverse() {
        let f = Field::new(5, 1).unwrap();
        assert_eq!(f.inv(Element::ZERO), Err(Error::ZeroInverse));
    }

    #[test]
    fn spec_json_shape() {
        let f = Field::new(3, 2).unwrap();
        let json = serde_json::to_string(f.spec()).unwrap();
        assert_eq!(json, r#"{"p":3,"s":2,"modulus":[1,0,1]}"#);
        let back: FieldSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(Field::from_spec(back).unwrap(), f);
    }

    #[test]
    fn prime_power_split() {
        assert_eq!(prime_power(243), Some((3, 5)));
        assert_eq!(prime_power(1009), Some((1009, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }
}
