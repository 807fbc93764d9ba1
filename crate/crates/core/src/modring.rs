//! Arithmetic over `Z/p^kZ`, polynomials over `F_p`, the fields
//! `F_q = F_p[x]/(f)` and the polynomial quadratic residue symbol.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primality is verified by trial division below this bound and trusted above it.
const PRIME_CHECK_LIMIT: u64 = 1 << 20;

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

/// Extended Euclid on signed integers: returns `(g, s)` with `s*a ≡ g (mod m)`.
fn ext_gcd(a: i64, m: i64) -> (i64, i64) {
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r, old_s)
}

/// The ring `Z/p^kZ`. Elements are plain `u64` residues in `[0, p^k)`.
///
/// `p^k` is capped below `2^32` so every product of two residues fits a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modulus {
    p: u64,
    k: u32,
    m: u64,
}

impl Modulus {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("exponent k must be at least 1".into()));
        }
        if p < 2 || (p < PRIME_CHECK_LIMIT && !is_prime(p)) {
            return Err(Error::NotPrime(p));
        }
        let m = (p as u128)
            .checked_pow(k)
            .filter(|&m| m < (1u128 << 32))
            .ok_or(Error::ModulusTooLarge { p, k })?;
        Ok(Modulus { p, k, m: m as u64 })
    }

    /// `F_p`, i.e. exponent one.
    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, 1)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    /// The modulus `p^k` itself.
    #[inline]
    pub fn m(&self) -> u64 {
        self.m
    }

    /// The same prime with a different exponent.
    pub fn with_exponent(&self, k: u32) -> Result<Self> {
        Self::new(self.p, k)
    }

    pub fn residue_field(&self) -> Self {
        Modulus { p: self.p, k: 1, m: self.p }
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.m
    }

    #[inline]
    pub fn reduce_signed(&self, a: i64) -> u64 {
        a.rem_euclid(self.m as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.m
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.m;
        a %= self.m;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    #[inline]
    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// Inverse of a unit; `None` when `p | a`.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.m;
        if !self.is_unit(a) {
            return None;
        }
        let (g, s) = ext_gcd(a as i64, self.m as i64);
        debug_assert_eq!(g, 1);
        Some(self.reduce_signed(s))
    }

    /// `p`-adic valuation of a residue, with `v(0) = k`.
    pub fn valuation(&self, a: u64) -> u32 {
        let mut a = a % self.m;
        if a == 0 {
            return self.k;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}^{}", self.p, self.k)
        }
    }
}

/// A residue in `Z/p^kZ` that carries its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZmodPK {
    value: u64,
    modulus: Modulus,
}

impl ZmodPK {
    pub fn new(value: u64, modulus: Modulus) -> Self {
        ZmodPK { value: modulus.reduce(value), modulus }
    }

    pub fn from_i64(value: i64, modulus: Modulus) -> Self {
        ZmodPK { value: modulus.reduce_signed(value), modulus }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.to_string(),
                other.modulus.to_string(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(ZmodPK { value: self.modulus.add(self.value, other.value), modulus: self.modulus })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(ZmodPK { value: self.modulus.sub(self.value, other.value), modulus: self.modulus })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(ZmodPK { value: self.modulus.mul(self.value, other.value), modulus: self.modulus })
    }

    pub fn inverse(&self) -> Result<Self> {
        self.modulus
            .inv(self.value)
            .map(|value| ZmodPK { value, modulus: self.modulus })
            .ok_or(Error::NotAUnit { value: self.value, modulus: self.modulus.m() })
    }
}

impl fmt::Display for ZmodPK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: u64, p: u64) -> i8 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let f = Modulus { p, k: 1, m: p };
    if f.pow(a, (p - 1) / 2) == 1 {
        1
    } else {
        -1
    }
}

/// A polynomial over `F_p`, coefficients stored from the constant term up.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut poly = FpPoly { p, coeffs: coeffs.into_iter().map(|c| c % p).collect() };
        poly.trim();
        poly
    }

    pub fn from_i64(p: u64, coeffs: &[i64]) -> Self {
        Self::new(p, coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect())
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        FpPoly { p, coeffs: vec![1 % p] }
    }

    pub fn x(p: u64) -> Self {
        FpPoly { p, coeffs: vec![0, 1] }
    }

    /// `x - a`.
    pub fn linear(p: u64, a: u64) -> Self {
        Self::new(p, vec![(p - a % p) % p, 1])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    fn field(&self) -> Modulus {
        Modulus { p: self.p, k: 1, m: self.p }
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let f = self.field();
        let inv = f.inv(self.lead()).expect("leading coefficient is nonzero");
        self.scale(inv)
    }

    pub fn scale(&self, c: u64) -> Self {
        let f = self.field();
        Self::new(self.p, self.coeffs.iter().map(|&a| f.mul(a, c % self.p)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = self.field();
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(self.p, (0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let f = self.field();
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(self.p, (0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        let f = self.field();
        Self::new(self.p, self.coeffs.iter().map(|&a| f.neg(a)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p);
        }
        let f = self.field();
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::new(self.p, out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.p);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let f = self.field();
        let inv_lead = f.inv(divisor.lead()).expect("leading coefficient is nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(self.p), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = f.mul(rem[i], inv_lead);
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] = f.sub(rem[i - dd + j], f.mul(c, b));
            }
        }
        (Self::new(self.p, quot), Self::new(self.p, rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    pub fn divides(&self, other: &Self) -> bool {
        other.rem(self).is_zero()
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        let f = self.field();
        Self::new(
            self.p,
            self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| f.mul(c, i as u64 % self.p)).collect(),
        )
    }

    /// `f(-x)` made monic again, i.e. the polynomial whose roots are the negated roots.
    pub fn negated_roots(&self) -> Self {
        let f = self.field();
        Self::new(
            self.p,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if i % 2 == 1 { f.neg(c) } else { c })
                .collect(),
        )
        .monic()
    }

    pub fn eval(&self, x: u64) -> u64 {
        let f = self.field();
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x % self.p), c))
    }

    pub fn is_irreducible(&self) -> bool {
        match self.degree() {
            None | Some(0) => false,
            Some(1) => true,
            Some(d) => {
                let m = self.monic();
                (1..=d / 2).all(|e| irreducibles(self.p, e).iter().all(|g| !g.divides(&m)))
            }
        }
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

type IrreducibleCache = Mutex<HashMap<(u64, usize), Arc<Vec<FpPoly>>>>;

fn irreducible_cache() -> &'static IrreducibleCache {
    static CACHE: OnceLock<IrreducibleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// All monic irreducible polynomials of degree `d` over `F_p`, in lexicographic
/// order of their coefficient vectors. A degree-`d` monic is kept iff no
/// irreducible of degree at most `d/2` divides it.
pub fn irreducibles(p: u64, d: usize) -> Arc<Vec<FpPoly>> {
    if let Some(hit) = irreducible_cache().lock().unwrap().get(&(p, d)) {
        return hit.clone();
    }
    let smaller: Vec<Arc<Vec<FpPoly>>> = (1..=d / 2).map(|e| irreducibles(p, e)).collect();
    let mut found = Vec::new();
    if d >= 1 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut coeffs = Vec::with_capacity(d + 1);
            let mut rest = idx;
            for _ in 0..d {
                coeffs.push(rest % p);
                rest /= p;
            }
            coeffs.push(1);
            let cand = FpPoly { p, coeffs };
            if smaller.iter().all(|list| list.iter().all(|g| !g.divides(&cand))) {
                found.push(cand);
            }
        }
    }
    let found = Arc::new(found);
    irreducible_cache().lock().unwrap().insert((p, d), found.clone());
    found
}

/// Factor a nonzero polynomial into monic irreducibles with multiplicities.
///
/// The leading coefficient is discarded; factors are sorted by degree, then
/// coefficients.
pub fn poly_factor(m: &FpPoly) -> Vec<(FpPoly, u32)> {
    assert!(!m.is_zero(), "cannot factor the zero polynomial");
    let p = m.p;
    let mut rest = m.monic();
    let mut factors = Vec::new();
    let mut d = 1;
    while rest.degree().unwrap_or(0) >= 2 * d {
        for g in irreducibles(p, d).iter() {
            let mut e = 0;
            loop {
                let (q, r) = rest.div_rem(g);
                if !r.is_zero() {
                    break;
                }
                rest = q;
                e += 1;
            }
            if e > 0 {
                factors.push((g.clone(), e));
            }
        }
        d += 1;
    }
    // What remains has no factor of degree < d and degree < 2d, so it is irreducible.
    if rest.degree().unwrap_or(0) > 0 {
        match factors.iter_mut().find(|(g, _)| *g == rest) {
            Some((_, e)) => *e += 1,
            None => factors.push((rest, 1)),
        }
    }
    factors.sort_by(|a, b| (a.0.degree(), &a.0.coeffs).cmp(&(b.0.degree(), &b.0.coeffs)));
    factors
}

/// The finite field `F_p[x]/(f)` for a monic irreducible `f`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqField {
    p: u64,
    modulus: FpPoly,
    degree: usize,
    order: u64,
}

impl FqField {
    pub fn new(modulus: FpPoly) -> Result<Self> {
        if !modulus.is_monic() || !modulus.is_irreducible() {
            return Err(Error::InvalidInput(format!("{modulus} is not monic irreducible")));
        }
        let degree = modulus.degree().unwrap();
        let order = modulus
            .p
            .checked_pow(degree as u32)
            .ok_or_else(|| Error::InvalidInput("field order overflows u64".into()))?;
        Ok(FqField { p: modulus.p, modulus, degree, order })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn modulus(&self) -> &FpPoly {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `q = p^deg f`.
    pub fn order(&self) -> u64 {
        self.order
    }

    fn base(&self) -> Modulus {
        Modulus { p: self.p, k: 1, m: self.p }
    }

    /// Reduce an arbitrary polynomial to its length-`d` coefficient vector.
    pub fn embed(&self, poly: &FpPoly) -> Vec<u64> {
        let r = poly.rem(&self.modulus);
        (0..self.degree).map(|i| r.coeff(i)).collect()
    }

    pub fn raw_zero(&self) -> Vec<u64> {
        vec![0; self.degree]
    }

    pub fn raw_const(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0; self.degree];
        v[0] = c % self.p;
        v
    }

    /// The class of `x`.
    pub fn raw_generator(&self) -> Vec<u64> {
        self.embed(&FpPoly::x(self.p))
    }

    pub fn raw_add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let f = self.base();
        a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
    }

    pub fn raw_sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let f = self.base();
        a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
    }

    pub fn raw_neg(&self, a: &[u64]) -> Vec<u64> {
        let f = self.base();
        a.iter().map(|&x| f.neg(x)).collect()
    }

    pub fn raw_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let f = self.base();
        let d = self.degree;
        let mut prod = vec![0u64; 2 * d];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = f.add(prod[i + j], f.mul(x, y));
            }
        }
        // x^d = -(f_0 + ... + f_{d-1} x^{d-1}) since f is monic.
        let fc = &self.modulus.coeffs;
        for i in (d..2 * d).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..d {
                prod[i - d + j] = f.sub(prod[i - d + j], f.mul(c, fc[j]));
            }
        }
        prod.truncate(d);
        prod
    }

    pub fn raw_pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.raw_const(1);
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.raw_mul(&acc, &base);
            }
            base = self.raw_mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn raw_is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn raw_inv(&self, a: &[u64]) -> Option<Vec<u64>> {
        if self.raw_is_zero(a) {
            None
        } else {
            Some(self.raw_pow(a, self.order - 2))
        }
    }
}

/// An element of `F_q` tied to its field descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqElem {
    field: Arc<FqField>,
    coeffs: Vec<u64>,
}

impl FqElem {
    pub fn new(field: Arc<FqField>, poly: &FpPoly) -> Self {
        let coeffs = field.embed(poly);
        FqElem { field, coeffs }
    }

    pub fn from_raw(field: Arc<FqField>, coeffs: Vec<u64>) -> Self {
        debug_assert_eq!(coeffs.len(), field.degree);
        FqElem { field, coeffs }
    }

    pub fn one(field: Arc<FqField>) -> Self {
        let coeffs = field.raw_const(1);
        FqElem { field, coeffs }
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn raw(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn to_poly(&self) -> FpPoly {
        FpPoly::new(self.field.p, self.coeffs.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.field.raw_is_zero(&self.coeffs)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_raw(self.field.clone(), self.field.raw_add(&self.coeffs, &other.coeffs)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_raw(self.field.clone(), self.field.raw_sub(&self.coeffs, &other.coeffs)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_raw(self.field.clone(), self.field.raw_mul(&self.coeffs, &other.coeffs)))
    }

    pub fn pow(&self, e: u64) -> Self {
        Self::from_raw(self.field.clone(), self.field.raw_pow(&self.coeffs, e))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.field
            .raw_inv(&self.coeffs)
            .map(|c| Self::from_raw(self.field.clone(), c))
            .ok_or(Error::DivisionByZero)
    }
}

/// The quadratic residue symbol `(g/f)` for a monic irreducible `f` over `F_p`, `p` odd.
pub fn residue_symbol(g: &FpPoly, f: &FpPoly) -> Result<i8> {
    if f.p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    if g.p() != f.p() {
        return Err(Error::ModulusMismatch(g.p().to_string(), f.p().to_string()));
    }
    let field = FqField::new(f.clone())?;
    let r = field.embed(g);
    if field.raw_is_zero(&r) {
        return Ok(0);
    }
    let s = field.raw_pow(&r, (field.order - 1) / 2);
    if s == field.raw_const(1) {
        Ok(1)
    } else {
        debug_assert_eq!(s, field.raw_const(f.p() - 1));
        Ok(-1)
    }
}
