//! Exact additive-character sums as elements of the group ring `Z[Z/p^kZ]`.
//!
//! A [`CharSum`] stores one integer per phase `e(j/p^k)`. Two sums have the
//! same complex value iff their canonical forms (reduction modulo the
//! cyclotomic polynomial `Φ_{p^k}`) agree, since `{ζ^j : j < φ(p^k)}` is a
//! basis of `Z[ζ]`.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modring::{legendre, Modulus, ZmodPK};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharSum {
    modulus: Modulus,
    coeffs: Vec<BigInt>,
}

/// JSON rendering of a character sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharSumJson {
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact_coeffs: Option<Vec<String>>,
}

impl CharSum {
    pub fn zero(modulus: Modulus) -> Self {
        CharSum { modulus, coeffs: vec![BigInt::zero(); modulus.m() as usize] }
    }

    /// The integer `c`, i.e. weight `c` on the trivial phase.
    pub fn from_integer(modulus: Modulus, c: BigInt) -> Self {
        let mut s = Self::zero(modulus);
        s.coeffs[0] = c;
        s
    }

    /// Build from a phase histogram of machine integers.
    pub fn from_counts(modulus: Modulus, counts: &[i64]) -> Self {
        assert_eq!(counts.len(), modulus.m() as usize);
        CharSum { modulus, coeffs: counts.iter().map(|&c| BigInt::from(c)).collect() }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn accumulate(&mut self, exponent: ZmodPK, weight: i64) -> Result<()> {
        if exponent.modulus() != self.modulus {
            return Err(Error::ModulusMismatch(exponent.modulus().to_string(), self.modulus.to_string()));
        }
        self.add_phase(exponent.value(), &BigInt::from(weight));
        Ok(())
    }

    /// `coeffs[j mod m] += w` without a modulus check.
    pub fn add_phase(&mut self, j: u64, w: &BigInt) {
        let idx = (j % self.modulus.m()) as usize;
        self.coeffs[idx] += w;
    }

    pub fn merge(&mut self, other: &CharSum) -> Result<()> {
        if other.modulus != self.modulus {
            return Err(Error::ModulusMismatch(other.modulus.to_string(), self.modulus.to_string()));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &CharSum) -> Result<CharSum> {
        let mut out = other.scale(&BigInt::from(-1));
        out.merge(self)?;
        Ok(out)
    }

    pub fn scale(&self, c: &BigInt) -> CharSum {
        CharSum { modulus: self.modulus, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Multiply by the phase `e(j/m)`.
    pub fn rotate(&self, j: u64) -> CharSum {
        let m = self.modulus.m() as usize;
        let shift = (j % self.modulus.m()) as usize;
        let mut coeffs = vec![BigInt::zero(); m];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(i + shift) % m] = c.clone();
        }
        CharSum { modulus: self.modulus, coeffs }
    }

    /// Group-ring product (convolution of phases).
    pub fn mul(&self, other: &CharSum) -> Result<CharSum> {
        if other.modulus != self.modulus {
            return Err(Error::ModulusMismatch(other.modulus.to_string(), self.modulus.to_string()));
        }
        let m = self.modulus.m() as usize;
        let mut out = Self::zero(self.modulus);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[(i + j) % m] += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Reinterpret a sum over phases mod `p^k` as one mod `p^{k'}`, `k' ≥ k`
    /// (phase `j/p^k` becomes `j p^{k'-k} / p^{k'}`).
    pub fn embed(&self, target: Modulus) -> Result<CharSum> {
        if target.p() != self.modulus.p() || target.k() < self.modulus.k() {
            return Err(Error::ModulusMismatch(self.modulus.to_string(), target.to_string()));
        }
        let step = target.m() / self.modulus.m();
        let mut out = Self::zero(target);
        for (j, c) in self.coeffs.iter().enumerate() {
            out.coeffs[j * step as usize] = c.clone();
        }
        Ok(out)
    }

    /// Reduce modulo `Φ_{p^k}(x) = Σ_{i<p} x^{i p^{k-1}}`, leaving only
    /// exponents below `φ(p^k)`.
    pub fn canonicalize(&self) -> CharSum {
        let p = self.modulus.p() as usize;
        let step = (self.modulus.m() / self.modulus.p()) as usize;
        let phi = (p - 1) * step;
        let mut coeffs = self.coeffs.clone();
        for j in phi..coeffs.len() {
            if coeffs[j].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut coeffs[j]);
            let r = j - phi;
            for i in 0..p - 1 {
                coeffs[r + i * step] -= &c;
            }
        }
        CharSum { modulus: self.modulus, coeffs }
    }

    pub fn is_canonical(&self) -> bool {
        let phi = ((self.modulus.p() - 1) * (self.modulus.m() / self.modulus.p())) as usize;
        self.coeffs[phi..].iter().all(|c| c.is_zero())
    }

    /// Exact value equality.
    pub fn value_eq(&self, other: &CharSum) -> bool {
        self.modulus == other.modulus && self.canonicalize() == other.canonicalize()
    }

    pub fn is_zero_value(&self) -> bool {
        self.canonicalize().coeffs.iter().all(|c| c.is_zero())
    }

    /// Divide the value by an integer. The canonical coefficients must all be
    /// divisible; anything else means the value is not in `Z[ζ]` after division.
    pub fn div_exact(&self, d: &BigInt) -> Result<CharSum> {
        let canon = self.canonicalize();
        let mut coeffs = Vec::with_capacity(canon.coeffs.len());
        for c in &canon.coeffs {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return Err(Error::InexactDivision(d.to_string()));
            }
            coeffs.push(q);
        }
        Ok(CharSum { modulus: self.modulus, coeffs })
    }

    pub fn to_complex(&self) -> Complex64 {
        let m = self.modulus.m() as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), TAU * j as f64 / m))
            .sum()
    }

    pub fn magnitude(&self) -> f64 {
        self.canonicalize().to_complex().norm()
    }

    /// Largest absolute coefficient; bounds the floating error of [`Self::to_complex`].
    pub fn max_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    pub fn to_json(&self, exact: bool) -> CharSumJson {
        let canon = self.canonicalize();
        let z = canon.to_complex();
        CharSumJson {
            re: z.re,
            im: z.im,
            abs: z.norm(),
            exact_coeffs: exact.then(|| canon.coeffs.iter().map(|c| c.to_string()).collect()),
        }
    }
}

/// The quadratic Gauss sum `g_p = Σ_u e(u²/p)`: `√p` for `p ≡ 1 (4)`, `i√p` for `p ≡ 3 (4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussConstant {
    pub p: u64,
    /// True when `g_p = i√p`.
    pub imaginary: bool,
}

pub fn gauss_constant(p: u64) -> Result<GaussConstant> {
    if p == 2 {
        return Err(Error::EvenCharacteristic);
    }
    Modulus::prime(p)?;
    Ok(GaussConstant { p, imaginary: p % 4 == 3 })
}

impl GaussConstant {
    pub fn value(&self) -> Complex64 {
        let s = (self.p as f64).sqrt();
        if self.imaginary {
            Complex64::new(0.0, s)
        } else {
            Complex64::new(s, 0.0)
        }
    }

    /// `g_p^2 = (−1/p) p`.
    pub fn square(&self) -> i64 {
        legendre(self.p - 1, self.p) as i64 * self.p as i64
    }

    /// `g_p` as a group-ring element over phases mod `target` (a power of `p`).
    pub fn as_charsum(&self, target: Modulus) -> Result<CharSum> {
        let base = Modulus::prime(self.p)?;
        let mut s = CharSum::zero(base);
        for u in 0..self.p {
            s.add_phase(u * u, &BigInt::from(1));
        }
        s.embed(target)
    }

    /// `g_p^e` as an exact group-ring element.
    pub fn power(&self, e: u32, target: Modulus) -> Result<CharSum> {
        let scalar = BigInt::from(self.square()).pow(e / 2);
        let mut s = CharSum::from_integer(target, scalar);
        if e % 2 == 1 {
            s = s.mul(&self.as_charsum(target)?)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn md(p: u64, k: u32) -> Modulus {
        Modulus::new(p, k).unwrap()
    }

    fn counts(p: u64, k: u32, v: &[i64]) -> CharSum {
        CharSum::from_counts(md(p, k), v)
    }

    #[test]
    fn accumulate_examples() {
        let r = md(5, 1);
        let mut s = CharSum::zero(r);
        s.accumulate(ZmodPK::new(0, r), 1).unwrap();
        assert!((s.to_complex() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let mut full = CharSum::zero(md(3, 2));
        for j in 0..9 {
            full.add_phase(j, &BigInt::from(1));
        }
        assert!(full.is_zero_value());
        let mut t = CharSum::zero(r);
        t.accumulate(ZmodPK::new(3, r), 4).unwrap();
        t.accumulate(ZmodPK::new(3, r), 4).unwrap();
        assert_eq!(t.coeffs()[3], BigInt::from(8));
        assert!(t.accumulate(ZmodPK::new(1, md(5, 2)), 1).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        // Φ_9 = 1 + x^3 + x^6
        assert!(counts(3, 2, &[1, 0, 0, 1, 0, 0, 1, 0, 0]).canonicalize().coeffs().iter().all(|c| c.is_zero()));
        let reduced = counts(3, 2, &[1, 2, 3, 4, 5, 6, 0, 0, 0]);
        assert_eq!(reduced.canonicalize(), reduced);
        assert_eq!(counts(3, 1, &[0, 1, 1]).canonicalize(), counts(3, 1, &[-1, 0, 0]));
    }

    #[test]
    fn kloosterman_1_1_3() {
        // x + 1/x for x = 1, 2 mod 3: phases 2 and 1
        let s = counts(3, 1, &[0, 1, 1]);
        assert!((s.to_complex() - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(CharSum::zero(md(3, 1)).to_complex(), Complex64::new(0.0, 0.0));
        let w = CharSum::from_integer(md(7, 1), BigInt::from(5));
        assert!((w.to_complex() - Complex64::new(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gauss_constant_matches_direct_sum() {
        for p in [3u64, 5, 7, 11, 13] {
            let g = gauss_constant(p).unwrap();
            let direct: Complex64 =
                (0..p).map(|u| Complex64::from_polar(1.0, TAU * ((u * u) % p) as f64 / p as f64)).sum();
            assert!((direct - g.value()).norm() < 1e-9, "p={p}");
            let r = md(p, 1);
            let sq = g.as_charsum(r).unwrap().mul(&g.as_charsum(r).unwrap()).unwrap();
            assert!(sq.value_eq(&CharSum::from_integer(r, BigInt::from(g.square()))));
        }
        assert!(!gauss_constant(5).unwrap().imaginary);
        assert!(gauss_constant(3).unwrap().imaginary);
        assert!(gauss_constant(7).unwrap().imaginary);
        assert_eq!(gauss_constant(2), Err(Error::EvenCharacteristic));
    }

    #[test]
    fn exact_division() {
        let s = counts(3, 1, &[0, 3, 3]);
        assert_eq!(s.div_exact(&BigInt::from(3)).unwrap(), counts(3, 1, &[-1, 0, 0]));
        // Raw coefficients (1,4,4) are not divisible by 3, the canonical form (-3,0,0) is.
        let t = counts(3, 1, &[1, 4, 4]);
        assert_eq!(t.div_exact(&BigInt::from(3)).unwrap(), counts(3, 1, &[-1, 0, 0]));
        assert!(matches!(counts(3, 1, &[1, 0, 0]).div_exact(&BigInt::from(3)), Err(Error::InexactDivision(_))));
    }

    #[test]
    fn embed_and_rotate() {
        let s = counts(3, 1, &[0, 1, 0]);
        let e = s.embed(md(3, 2)).unwrap();
        assert!((e.to_complex() - s.to_complex()).norm() < 1e-12);
        let r = e.rotate(8);
        assert_eq!(r.coeffs()[2], BigInt::from(1));
    }

    fn arb_charsum() -> impl Strategy<Value = CharSum> {
        prop_oneof![Just((3u64, 1u32)), Just((3, 2)), Just((3, 3)), Just((5, 1)), Just((5, 2)), Just((7, 1))]
            .prop_flat_map(|(p, k)| {
                let m = p.pow(k) as usize;
                proptest::collection::vec(-50i64..50, m).prop_map(move |v| counts(p, k, &v))
            })
    }

    proptest! {
        #[test]
        fn canonicalize_idempotent_and_value_preserving(s in arb_charsum()) {
            let c = s.canonicalize();
            prop_assert!(c.is_canonical());
            prop_assert_eq!(c.canonicalize(), c.clone());
            prop_assert!((c.to_complex() - s.to_complex()).norm() < 1e-9);
        }

        #[test]
        fn linearity(a in arb_charsum(), seed in 0u64..1000) {
            let r = a.modulus();
            let m = r.m() as usize;
            let v: Vec<i64> = (0..m).map(|i| ((seed as usize * 31 + i * 17) % 23) as i64 - 11).collect();
            let b = CharSum::from_counts(r, &v);
            let mut sum = a.clone();
            sum.merge(&b).unwrap();
            prop_assert!((sum.to_complex() - (a.to_complex() + b.to_complex())).norm() < 1e-9);
        }

        #[test]
        fn value_equality_is_exact(a in arb_charsum()) {
            // Adding any multiple of a shifted cyclotomic relation leaves the value unchanged.
            let r = a.modulus();
            let step = r.m() / r.p();
            let mut b = a.clone();
            for i in 0..r.p() {
                b.add_phase(1 + i * step, &BigInt::from(7));
            }
            prop_assert!(a.value_eq(&b));
            let mut c = a.clone();
            c.add_phase(0, &BigInt::from(1));
            prop_assert!(!a.value_eq(&c));
        }
    }
}
