//! Arithmetic in GF(p^k).
//!
//! Elements are polynomials over Z_p of degree < k, stored as coefficient
//! vectors (lowest degree first). Every element also has a canonical integer
//! encoding `Σ coeffs[i]·p^i`, which is what the hot paths operate on.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order this crate builds.
pub const MAX_ORDER: u64 = 1 << 16;

const MUL_TABLE_LIMIT: u32 = 256;
const INV_TABLE_LIMIT: u32 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {0} exceeds the supported maximum of {MAX_ORDER}")]
    TooLarge(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("element {0:?} is not valid in GF({1})")]
    InvalidElement(Vec<u32>, u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Returns true when `n` is prime.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
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

/// Decomposes `q = p^k`, or returns `None` when `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        // no factor up to sqrt(q): q itself is prime
        return Some((q, 1));
    }
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

/// Parameters that pin down one concrete representation of GF(p^k).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub k: u32,
    pub q: u32,
    /// Monic modulus, lowest degree first; length `k + 1`.
    pub modulus: Vec<u32>,
}

impl FieldSpec {
    /// Spec for GF(p^k) using the lexicographically smallest irreducible modulus.
    pub fn new(p: u32, k: u32) -> Result<Self, FieldError> {
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64)
            .checked_pow(k)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or(FieldError::TooLarge((p as u64).saturating_pow(k)))?;
        let modulus = find_irreducible(p, k)?;
        Ok(Self {
            p,
            k,
            q: q as u32,
            modulus,
        })
    }

    pub fn for_order(q: u64) -> Result<Self, FieldError> {
        if q > MAX_ORDER {
            return Err(FieldError::TooLarge(q));
        }
        let (p, k) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        Self::new(p as u32, k)
    }
}

/// An element of GF(p^k) as its coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    pub coeffs: Vec<u32>,
}

impl FieldElement {
    pub fn new(coeffs: Vec<u32>) -> Self {
        Self { coeffs }
    }
}

/// The lexicographically smallest monic irreducible polynomial of degree `k`
/// over Z_p, comparing `(c_{k-1}, …, c_0)`.
///
/// The result is lowest degree first with the leading 1 included. For `k = 1`
/// the polynomial `x` is returned; prime fields never consult it.
pub fn find_irreducible(p: u32, k: u32) -> Result<Vec<u32>, FieldError> {
    if !is_prime(p as u64) {
        return Err(FieldError::NotPrime(p as u64));
    }
    if k == 0 {
        return Err(FieldError::ZeroDegree);
    }
    if k == 1 {
        return Ok(vec![0, 1]);
    }
    let count = (p as u64)
        .checked_pow(k)
        .filter(|&c| c <= MAX_ORDER)
        .ok_or(FieldError::TooLarge((p as u64).saturating_pow(k)))?;
    // Counting upward with c_0 as the least significant digit walks the
    // candidates in exactly the required lexicographic order.
    for code in 0..count {
        let mut poly = digits(code as u32, p, k as usize);
        poly.push(1);
        if is_irreducible(&poly, p) {
            return Ok(poly);
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over Z_p")
}

fn digits(mut value: u32, p: u32, k: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(k + 1);
    for _ in 0..k {
        out.push(value % p);
        value /= p;
    }
    out
}

/// Exhaustive factor search: `f` is irreducible iff no monic polynomial of
/// degree `1..=deg/2` divides it.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut g = digits(code as u32, p, d);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Remainder of `f` by monic `g` over Z_p.
fn poly_rem(f: &[u32], g: &[u32], p: u32) -> Vec<u32> {
    let dg = g.len() - 1;
    let mut r: Vec<u64> = f.iter().map(|&c| c as u64).collect();
    let p = p as u64;
    while r.len() > dg {
        let lead = r[r.len() - 1] % p;
        let shift = r.len() - 1 - dg;
        if lead != 0 {
            for (i, &gc) in g.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - lead * gc as u64 % p) % p;
            }
        }
        r.pop();
    }
    r.into_iter().map(|c| (c % p) as u32).collect()
}

/// Arithmetic engine over a [`FieldSpec`].
///
/// Operates on canonical integer encodings in `[0, q)`; the `FieldElement`
/// methods validate and convert at the boundary.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    mul_table: Option<Vec<u32>>,
    inv_table: Option<Vec<u32>>,
}

impl Field {
    pub fn new(spec: FieldSpec) -> Self {
        let mut field = Self {
            spec,
            mul_table: None,
            inv_table: None,
        };
        let q = field.spec.q;
        if q <= MUL_TABLE_LIMIT {
            let mut table = vec![0; (q * q) as usize];
            for a in 0..q {
                for b in a..q {
                    let c = field.mul_slow(a, b);
                    table[(a * q + b) as usize] = c;
                    table[(b * q + a) as usize] = c;
                }
            }
            field.mul_table = Some(table);
        }
        if q <= INV_TABLE_LIMIT {
            let table = (0..q)
                .map(|a| if a == 0 { 0 } else { field.pow(a, q - 2) })
                .collect();
            field.inv_table = Some(table);
        }
        field
    }

    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        Ok(Self::new(FieldSpec::for_order(q)?))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn order(&self) -> u32 {
        self.spec.q
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.p
    }

    pub fn encode(&self, e: &FieldElement) -> Result<u32, FieldError> {
        let FieldSpec { p, k, q, .. } = self.spec;
        if e.coeffs.len() != k as usize || e.coeffs.iter().any(|&c| c >= p) {
            return Err(FieldError::InvalidElement(e.coeffs.clone(), q));
        }
        Ok(e.coeffs.iter().rev().fold(0, |acc, &c| acc * p + c))
    }

    pub fn decode(&self, value: u32) -> Result<FieldElement, FieldError> {
        if value >= self.spec.q {
            return Err(FieldError::InvalidElement(vec![value], self.spec.q));
        }
        Ok(FieldElement::new(digits(
            value,
            self.spec.p,
            self.spec.k as usize,
        )))
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        let sum = self.add_enc(self.encode(a)?, self.encode(b)?);
        self.decode(sum)
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        let prod = self.mul_enc(self.encode(a)?, self.encode(b)?);
        self.decode(prod)
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, FieldError> {
        let inv = self.inv_enc(self.encode(a)?)?;
        self.decode(inv)
    }

    /// Sum of two encoded elements.
    #[inline]
    pub fn add_enc(&self, mut a: u32, mut b: u32) -> u32 {
        let p = self.spec.p;
        if self.spec.k == 1 {
            let s = a + b;
            return if s >= p { s - p } else { s };
        }
        if p == 2 {
            return a ^ b;
        }
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.spec.k {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    #[inline]
    pub fn neg_enc(&self, mut a: u32) -> u32 {
        let p = self.spec.p;
        if p == 2 {
            return a;
        }
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.spec.k {
            out += ((p - a % p) % p) * place;
            a /= p;
            place *= p;
        }
        out
    }

    #[inline]
    pub fn sub_enc(&self, a: u32, b: u32) -> u32 {
        self.add_enc(a, self.neg_enc(b))
    }

    /// Product of two encoded elements.
    #[inline]
    pub fn mul_enc(&self, a: u32, b: u32) -> u32 {
        match &self.mul_table {
            Some(t) => t[(a * self.spec.q + b) as usize],
            None => self.mul_slow(a, b),
        }
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let FieldSpec { p, k, .. } = self.spec;
        if k == 1 {
            return ((a as u64 * b as u64) % p as u64) as u32;
        }
        let k = k as usize;
        let p64 = p as u64;
        let da = digits(a, p, k);
        let db = digits(b, p, k);
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p64;
            }
        }
        // reduce with x^k = -(c_0 + … + c_{k-1} x^{k-1})
        let m = &self.spec.modulus;
        for top in (k..prod.len()).rev() {
            let lead = prod[top];
            if lead == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &mi) in m.iter().enumerate().take(k) {
                let sub = lead * mi as u64 % p64;
                let idx = top - k + i;
                prod[idx] = (prod[idx] + p64 - sub) % p64;
            }
        }
        prod[..k].iter().rev().fold(0u64, |acc, &c| acc * p64 + c) as u32
    }

    fn pow(&self, mut base: u32, mut exp: u32) -> u32 {
        let mut acc = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_enc(acc, base);
            }
            base = self.mul_enc(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of an encoded element.
    #[inline]
    pub fn inv_enc(&self, a: u32) -> Result<u32, FieldError> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(match &self.inv_table {
            Some(t) => t[a as usize],
            None => self.pow(a, self.spec.q - 2),
        })
    }
}
