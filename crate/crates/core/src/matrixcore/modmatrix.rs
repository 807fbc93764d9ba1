use std::fmt;

use serde::{Deserialize, Serialize};

use super::dense::{FpMatrix, PrimeField};
use crate::error::{Error, Result};
use crate::modring::{FpPoly, Modulus};

/// A square matrix over `Z/p^kZ`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    n: usize,
    modulus: Modulus,
    entries: Vec<u64>,
}

/// Elementary-divisor exponents `e_1 ≤ … ≤ e_n`; exponent `k` stands for a zero divisor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SmithForm {
    pub exponents: Vec<u32>,
}

impl SmithForm {
    /// The invariant factors seen modulo `p^l`, i.e. every exponent capped at `l`.
    pub fn truncate(&self, l: u32) -> SmithForm {
        SmithForm { exponents: self.exponents.iter().map(|&e| e.min(l)).collect() }
    }
}

impl ModMatrix {
    pub fn new(n: usize, modulus: Modulus, entries: Vec<u64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!("{} entries for an {n}x{n} matrix", entries.len())));
        }
        let entries = entries.into_iter().map(|e| modulus.reduce(e)).collect();
        Ok(ModMatrix { n, modulus, entries })
    }

    pub fn from_i64(n: usize, modulus: Modulus, entries: &[i64]) -> Result<Self> {
        Self::new(n, modulus, entries.iter().map(|&e| modulus.reduce_signed(e)).collect())
    }

    pub fn zero(n: usize, modulus: Modulus) -> Self {
        ModMatrix { n, modulus, entries: vec![0; n * n] }
    }

    pub fn identity(n: usize, modulus: Modulus) -> Self {
        Self::scalar_matrix(n, modulus, 1)
    }

    pub fn scalar_matrix(n: usize, modulus: Modulus, c: u64) -> Self {
        let mut m = Self::zero(n, modulus);
        for i in 0..n {
            m.entries[i * n + i] = modulus.reduce(c);
        }
        m
    }

    pub fn diag(modulus: Modulus, d: &[u64]) -> Self {
        let n = d.len();
        let mut m = Self::zero(n, modulus);
        for (i, &c) in d.iter().enumerate() {
            m.entries[i * n + i] = modulus.reduce(c);
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    #[inline]
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.n + j] = self.modulus.reduce(v);
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus.to_string(), other.modulus.to_string()));
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let r = self.modulus;
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| r.add(a, b)).collect();
        Ok(ModMatrix { entries, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let r = self.modulus;
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| r.sub(a, b)).collect();
        Ok(ModMatrix { entries, ..*self })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let (n, r) = (self.n, self.modulus);
        let mut entries = vec![0u64; n * n];
        for i in 0..n {
            for t in 0..n {
                let a = self.entries[i * n + t];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.entries[t * n + j] % r.m();
                }
            }
            for e in &mut entries[i * n..(i + 1) * n] {
                *e %= r.m();
            }
        }
        Ok(ModMatrix { entries, ..*self })
    }

    pub fn scale(&self, c: u64) -> Self {
        let r = self.modulus;
        let c = r.reduce(c);
        ModMatrix { entries: self.entries.iter().map(|&a| r.mul(a, c)).collect(), ..*self }
    }

    pub fn neg(&self) -> Self {
        let r = self.modulus;
        ModMatrix { entries: self.entries.iter().map(|&a| r.neg(a)).collect(), ..*self }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        ModMatrix { entries: (0..n * n).map(|idx| self.entries[(idx % n) * n + idx / n]).collect(), ..*self }
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).fold(0, |acc, i| self.modulus.add(acc, self.entries[i * self.n + i]))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::identity(self.n, self.modulus);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).unwrap();
            }
            base = base.mul(&base).unwrap();
            e >>= 1;
        }
        acc
    }

    /// Reduce into `Z/p^jZ` for `j ≤ k`.
    pub fn reduce_to(&self, j: u32) -> Result<Self> {
        if j > self.modulus.k() {
            return Err(Error::InvalidInput(format!("cannot reduce mod {} to exponent {j}", self.modulus)));
        }
        let target = self.modulus.with_exponent(j)?;
        Ok(ModMatrix { entries: self.entries.iter().map(|&a| target.reduce(a)).collect(), n: self.n, modulus: target })
    }

    pub fn mod_p(&self) -> Self {
        let target = self.modulus.residue_field();
        ModMatrix { entries: self.entries.iter().map(|&a| target.reduce(a)).collect(), n: self.n, modulus: target }
    }

    /// Reinterpret the integer representatives modulo `p^j` (any `j`).
    pub fn lift_to(&self, j: u32) -> Result<Self> {
        let target = self.modulus.with_exponent(j)?;
        Ok(ModMatrix { entries: self.entries.iter().map(|&a| target.reduce(a)).collect(), n: self.n, modulus: target })
    }

    /// Exact division of every entry by `p^j`, landing in `Z/p^{k-j}Z`.
    pub fn div_p_pow(&self, j: u32) -> Result<Self> {
        let k = self.modulus.k();
        if j >= k {
            return Err(Error::InvalidInput("division would leave the zero ring".into()));
        }
        let d = self.modulus.p().pow(j);
        if self.entries.iter().any(|&a| a % d != 0) {
            return Err(Error::InexactDivision(format!("{}^{j}", self.modulus.p())));
        }
        let target = self.modulus.with_exponent(k - j)?;
        Ok(ModMatrix { entries: self.entries.iter().map(|&a| a / d).collect(), n: self.n, modulus: target })
    }

    /// Division-free characteristic polynomial `det(xI - M)`, coefficients
    /// low to high, computed with Berkowitz's algorithm over `Z/p^kZ`.
    pub fn charpoly(&self) -> Vec<u64> {
        let (n, r) = (self.n, self.modulus);
        // Coefficients high to low of the char poly of the leading r×r block.
        let mut vect = vec![1u64];
        for s in 0..n {
            // Block [[A_s, c], [row, a]] with A_s the leading s×s submatrix.
            let a = self.get(s, s);
            let mut t = vec![1u64, r.neg(a)];
            let mut v: Vec<u64> = (0..s).map(|i| self.get(i, s)).collect();
            for _ in 0..s {
                let dot = (0..s).fold(0, |acc, j| r.add(acc, r.mul(self.get(s, j), v[j])));
                t.push(r.neg(dot));
                v = (0..s)
                    .map(|i| (0..s).fold(0, |acc, j| r.add(acc, r.mul(self.get(i, j), v[j]))))
                    .collect();
            }
            let next: Vec<u64> = (0..s + 2)
                .map(|i| {
                    (0..=i.min(s)).fold(0, |acc, j| r.add(acc, r.mul(t[i - j], vect[j])))
                })
                .collect();
            vect = next;
        }
        vect.reverse();
        vect
    }

    pub fn charpoly_mod_p(&self) -> FpPoly {
        FpPoly::new(self.modulus.p(), self.mod_p().charpoly())
    }

    pub fn det(&self) -> u64 {
        let c0 = self.charpoly()[0];
        if self.n % 2 == 1 {
            self.modulus.neg(c0)
        } else {
            c0
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rank_mod_p() == self.n
    }

    /// Gauss-Jordan inverse with unit pivots.
    pub fn inverse(&self) -> Result<Self> {
        let (n, r) = (self.n, self.modulus);
        let w = 2 * n;
        let mut aug = vec![0u64; n * w];
        for i in 0..n {
            aug[i * w..i * w + n].copy_from_slice(&self.entries[i * n..(i + 1) * n]);
            aug[i * w + n + i] = 1 % r.m();
        }
        for c in 0..n {
            let pr = (c..n).find(|&i| r.is_unit(aug[i * w + c])).ok_or(Error::NotInvertible)?;
            if pr != c {
                for j in 0..w {
                    aug.swap(pr * w + j, c * w + j);
                }
            }
            let inv = r.inv(aug[c * w + c]).unwrap();
            for j in 0..w {
                aug[c * w + j] = r.mul(aug[c * w + j], inv);
            }
            for i in 0..n {
                let f = aug[i * w + c];
                if i == c || f == 0 {
                    continue;
                }
                for j in 0..w {
                    aug[i * w + j] = r.sub(aug[i * w + j], r.mul(f, aug[c * w + j]));
                }
            }
        }
        let entries = (0..n * n).map(|idx| aug[(idx / n) * w + n + idx % n]).collect();
        Ok(ModMatrix { entries, ..*self })
    }

    pub fn to_fp(&self) -> FpMatrix {
        let field = PrimeField::from_modulus(self.modulus);
        FpMatrix::from_fn(field, self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn from_fp(m: &FpMatrix) -> Self {
        assert_eq!(m.rows(), m.cols());
        let modulus = m.field().modulus();
        ModMatrix { n: m.rows(), modulus, entries: m.data().to_vec() }
    }

    pub fn rank_mod_p(&self) -> usize {
        self.to_fp().rank()
    }

    /// `lim rk M^j` mod p, reached by `j = n`.
    pub fn stable_rank(&self) -> usize {
        self.mod_p().pow(self.n as u64).rank_mod_p()
    }

    pub fn smith_form(&self) -> SmithForm {
        let (n, r) = (self.n, self.modulus);
        let k = r.k();
        let p = r.p();
        let mut a = self.entries.clone();
        let mut exps = Vec::with_capacity(n);
        for t in 0..n {
            let mut best: Option<(u32, usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    let v = r.valuation(a[i * n + j]);
                    if v < k && best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
            let Some((v, pi, pj)) = best else {
                exps.extend(std::iter::repeat_n(k, n - t));
                break;
            };
            for j in 0..n {
                a.swap(pi * n + j, t * n + j);
            }
            for i in 0..n {
                a.swap(i * n + pj, i * n + t);
            }
            let pv = p.pow(v);
            let u_inv = r.inv(a[t * n + t] / pv).expect("unit part");
            for i in t + 1..n {
                let f = r.mul(a[i * n + t] / pv, u_inv);
                if f != 0 {
                    for j in t..n {
                        a[i * n + j] = r.sub(a[i * n + j], r.mul(f, a[t * n + j]));
                    }
                }
            }
            for j in t + 1..n {
                let f = r.mul(a[t * n + j] / pv, u_inv);
                if f != 0 {
                    for i in t..n {
                        a[i * n + j] = r.sub(a[i * n + j], r.mul(f, a[i * n + t]));
                    }
                }
            }
            exps.push(v);
        }
        exps.sort_unstable();
        SmithForm { exponents: exps }
    }

    /// Parse `"r,c;r,c"` style text; entries may be negative and are reduced.
    pub fn parse(text: &str, modulus: Modulus) -> Result<Self> {
        let rows: Vec<Vec<i64>> = text
            .trim()
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|e| e.trim().parse::<i64>().map_err(|err| Error::Parse(format!("entry {e:?}: {err}"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!("matrix {text:?} is not square")));
        }
        Self::from_i64(n, modulus, &rows.concat())
    }
}

impl fmt::Display for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            if i > 0 {
                write!(f, ";")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn md(p: u64, k: u32) -> Modulus {
        Modulus::new(p, k).unwrap()
    }

    fn mm(p: u64, k: u32, text: &str) -> ModMatrix {
        ModMatrix::parse(text, md(p, k)).unwrap()
    }

    fn random(rng: &mut ChaCha8Rng, n: usize, r: Modulus) -> ModMatrix {
        ModMatrix::new(n, r, (0..n * n).map(|_| rng.gen_range(0..r.m())).collect()).unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize, r: Modulus) -> ModMatrix {
        loop {
            let m = random(rng, n, r);
            if m.is_invertible() {
                return m;
            }
        }
    }

    #[test]
    fn basic_arithmetic() {
        let r = md(3, 2);
        let a = mm(3, 2, "1,2;3,4");
        assert_eq!(ModMatrix::identity(2, r).mul(&a).unwrap(), a);
        assert_eq!(ModMatrix::identity(3, md(5, 2)).trace(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = random(&mut rng, 3, r);
            let y = random(&mut rng, 3, r);
            assert_eq!(x.mul(&y).unwrap().trace(), y.mul(&x).unwrap().trace());
        }
        assert!(matches!(a.add(&mm(3, 1, "1,0;0,1")), Err(Error::ModulusMismatch(..))));
        assert!(matches!(a.mul(&mm(3, 2, "1")), Err(Error::DimensionMismatch(..))));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mm(3, 2, "1,0;0,1").inverse().unwrap(), mm(3, 2, "1,0;0,1"));
        assert_eq!(mm(3, 2, "2,0;0,1").inverse().unwrap(), mm(3, 2, "5,0;0,1"));
        assert_eq!(mm(3, 1, "0,1;0,0").inverse(), Err(Error::NotInvertible));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let x = random_unit(&mut rng, 3, md(5, 2));
            assert_eq!(x.mul(&x.inverse().unwrap()).unwrap(), ModMatrix::identity(3, md(5, 2)));
        }
    }

    #[test]
    fn rank_examples() {
        let nil = mm(3, 1, "0,1;0,0");
        assert_eq!((nil.rank_mod_p(), nil.stable_rank()), (1, 0));
        let id = ModMatrix::identity(3, md(3, 2));
        assert_eq!((id.rank_mod_p(), id.stable_rank()), (3, 3));
        let d = ModMatrix::diag(md(3, 2), &[1, 0, 3]);
        assert_eq!((d.rank_mod_p(), d.stable_rank()), (1, 1));
    }

    #[test]
    fn smith_examples() {
        assert_eq!(ModMatrix::identity(3, md(5, 2)).smith_form().exponents, vec![0, 0, 0]);
        assert_eq!(mm(3, 2, "3,0;0,1").smith_form().exponents, vec![0, 1]);
        assert_eq!(mm(3, 2, "3,3;3,3").smith_form().exponents, vec![1, 2]);
        assert_eq!(ModMatrix::zero(2, md(3, 3)).smith_form().exponents, vec![3, 3]);
    }

    #[test]
    fn smith_invariant_under_unit_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, r) in [(2, md(3, 2)), (3, md(3, 3)), (3, md(5, 2))] {
            for _ in 0..1000 {
                // bias towards non-units so several exponents appear
                let m = random(&mut rng, n, r).scale(r.p().pow(rng.gen_range(0..r.k())));
                let u = random_unit(&mut rng, n, r);
                let v = random_unit(&mut rng, n, r);
                let conj = u.mul(&m).unwrap().mul(&v).unwrap();
                assert_eq!(conj.smith_form(), m.smith_form());
            }
        }
    }

    #[test]
    fn rank_matches_smith_for_prime_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let m = random(&mut rng, 3, md(3, 1));
            let zeros = m.smith_form().exponents.iter().filter(|&&e| e >= 1).count();
            assert_eq!(m.rank_mod_p(), 3 - zeros);
        }
    }

    #[test]
    fn charpoly_matches_cofactor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = md(3, 3);
        for _ in 0..200 {
            let m = random(&mut rng, 3, r);
            let e = |i, j| m.get(i, j) as i64;
            let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
            assert_eq!(m.det(), r.reduce_signed(det));
            let cp = m.charpoly();
            assert_eq!(cp.len(), 4);
            assert_eq!(cp[3], 1);
            assert_eq!(cp[2], r.neg(m.trace()));
            // Cayley-Hamilton
            let mut acc = ModMatrix::zero(3, r);
            for &c in cp.iter().rev() {
                acc = acc.mul(&m).unwrap().add(&ModMatrix::scalar_matrix(3, r, c)).unwrap();
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn parse_and_display() {
        let r = md(3, 2);
        let m = ModMatrix::parse(" 1, -1 ; 10 ,0", r).unwrap();
        assert_eq!(m.to_string(), "1,8;1,0");
        assert!(matches!(ModMatrix::parse("1,2;3", r), Err(Error::Parse(_))));
        assert!(matches!(ModMatrix::parse("a", r), Err(Error::Parse(_))));
        assert_eq!(ModMatrix::parse("4", r).unwrap().n(), 1);
    }

    #[test]
    fn exact_division() {
        let m = mm(3, 3, "3,6;9,0");
        assert_eq!(m.div_p_pow(1).unwrap(), mm(3, 2, "1,2;3,0"));
        assert!(matches!(mm(3, 3, "1,0;0,0").div_p_pow(1), Err(Error::InexactDivision(_))));
    }
}
