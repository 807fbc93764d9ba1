//! Dense linear algebra over an arbitrary finite field.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::modring::{FpPoly, FqField, Modulus};

/// The scalar operations row reduction needs.
pub trait Field: Clone + Debug + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Eq + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_u64(&self, c: u64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
}

/// `F_p` with elements stored as `u64` residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    modulus: Modulus,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        Ok(PrimeField { modulus: Modulus::prime(p)? })
    }

    pub fn from_modulus(m: Modulus) -> Self {
        PrimeField { modulus: m.residue_field() }
    }

    pub fn p(&self) -> u64 {
        self.modulus.p()
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_u64(&self, c: u64) -> u64 {
        c % self.modulus.p()
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.modulus.add(*a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        self.modulus.sub(*a, *b)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.modulus.mul(*a, *b)
    }
    fn neg(&self, a: &u64) -> u64 {
        self.modulus.neg(*a)
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        self.modulus.inv(*a)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
}

impl Field for FqField {
    type Elem = Vec<u64>;

    fn zero(&self) -> Vec<u64> {
        self.raw_zero()
    }
    fn one(&self) -> Vec<u64> {
        self.raw_const(1)
    }
    fn from_u64(&self, c: u64) -> Vec<u64> {
        self.raw_const(c)
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        self.raw_add(a, b)
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        self.raw_sub(a, b)
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        self.raw_mul(a, b)
    }
    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        self.raw_neg(a)
    }
    fn inv(&self, a: &Vec<u64>) -> Option<Vec<u64>> {
        self.raw_inv(a)
    }
    fn is_zero(&self, a: &Vec<u64>) -> bool {
        self.raw_is_zero(a)
    }
}

/// A row-major `rows × cols` matrix over a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseMatrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

pub type FpMatrix = DenseMatrix<PrimeField>;
pub type FqMatrix = DenseMatrix<FqField>;

impl<F: Field> DenseMatrix<F> {
    pub fn new(field: F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { field, rows, cols, data })
    }

    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let data = vec![field.zero(); rows * cols];
        DenseMatrix { field, rows, cols, data }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = m.field.one();
        }
        m
    }

    /// Build from column vectors of equal length.
    pub fn from_columns(field: F, rows: usize, columns: &[Vec<F::Elem>]) -> Self {
        let mut m = Self::zeros(field, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.data[i * m.cols + j] = v.clone();
            }
        }
        m
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[F::Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<F::Elem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.field.is_zero(x))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(i, t);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), &f.mul(a, other.get(t, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(f.zero(), |acc, j| f.add(&acc, &f.mul(self.get(i, j), &v[j])))
            })
            .collect()
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&F::Elem, &F::Elem) -> F::Elem) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("elementwise operation".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| op(a, b)).collect();
        Ok(DenseMatrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| self.field.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| self.field.sub(a, b))
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let data = self.data.iter().map(|a| self.field.mul(a, c)).collect();
        DenseMatrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.field.clone(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// `self - c*I` for a square matrix.
    pub fn shift(&self, c: &F::Elem) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = self.field.sub(self.get(i, i), c);
            out.set(i, i, v);
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::identity(self.field.clone(), self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("square");
            }
            base = base.mul(&base).expect("square");
            e >>= 1;
        }
        acc
    }

    /// Evaluate a polynomial (coefficients low to high) at a square matrix.
    pub fn eval_poly(&self, coeffs: &[F::Elem]) -> Self {
        let mut acc = Self::zeros(self.field.clone(), self.rows, self.cols);
        for c in coeffs.iter().rev() {
            acc = acc.mul(self).expect("square");
            for i in 0..self.rows {
                let v = self.field.add(acc.get(i, i), c);
                acc.set(i, i, v);
            }
        }
        acc
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !f.is_zero(m.get(i, c))) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(m.get(r, c)).expect("nonzero pivot");
            for j in c..m.cols {
                let v = f.mul(m.get(r, j), &inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || f.is_zero(m.get(i, c)) {
                    continue;
                }
                let factor = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), &f.mul(&factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of `{v : self·v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<F::Elem>> {
        let f = &self.field;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![f.zero(); self.cols];
                v[fc] = f.one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(r.get(row, fc));
                }
                v
            })
            .collect()
    }

    /// One solution of `self·x = b`, or `None` if the system is inconsistent.
    pub fn solve(&self, b: &[F::Elem]) -> Option<Vec<F::Elem>> {
        assert_eq!(b.len(), self.rows);
        let f = &self.field;
        let mut aug = Self::zeros(f.clone(), self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![f.zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(row, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let f = &self.field;
        let mut aug = Self::zeros(f.clone(), n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, f.one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut out = Self::zeros(f.clone(), n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, r.get(i, n + j).clone());
            }
        }
        Some(out)
    }

    /// Monic minimal polynomial, coefficients low to high: the first power
    /// `M^d` lying in the span of `I, M, …, M^{d-1}`.
    pub fn min_poly(&self) -> Vec<F::Elem> {
        assert_eq!(self.rows, self.cols, "minimal polynomial of a non-square matrix");
        let f = &self.field;
        let n = self.rows;
        let mut powers = vec![Self::identity(f.clone(), n)];
        for d in 1..=n {
            let next = powers[d - 1].mul(self).expect("square");
            let cols: Vec<Vec<F::Elem>> = powers.iter().map(|p| p.data.clone()).collect();
            let system = Self::from_columns(f.clone(), n * n, &cols);
            if let Some(c) = system.solve(&next.data) {
                let mut poly: Vec<F::Elem> = c.iter().map(|x| f.neg(x)).collect();
                poly.push(f.one());
                return poly;
            }
            powers.push(next);
        }
        unreachable!("Cayley-Hamilton bounds the degree by n")
    }
}

impl FpMatrix {
    pub fn min_poly_fp(&self) -> FpPoly {
        FpPoly::new(self.field.p(), self.min_poly())
    }

    pub fn from_fn(field: PrimeField, rows: usize, cols: usize, f: impl Fn(usize, usize) -> u64) -> Self {
        let data = (0..rows * cols).map(|idx| f(idx / cols, idx % cols) % field.p()).collect();
        DenseMatrix { field, rows, cols, data }
    }
}

impl FqMatrix {
    /// Embed an `F_p` matrix into `F_q`.
    pub fn embed(field: FqField, m: &FpMatrix) -> Self {
        let data = m.data.iter().map(|&c| field.raw_const(c)).collect();
        DenseMatrix { field, rows: m.rows, cols: m.cols, data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn mat(p: u64, n: usize, entries: &[u64]) -> FpMatrix {
        DenseMatrix::new(fp(p), n, n, entries.to_vec()).unwrap()
    }

    #[test]
    fn min_poly_examples() {
        assert_eq!(mat(3, 2, &[0, 1, 0, 0]).min_poly_fp(), FpPoly::new(3, vec![0, 0, 1]));
        assert_eq!(mat(3, 3, &[1, 0, 0, 0, 1, 0, 0, 0, 1]).min_poly_fp(), FpPoly::linear(3, 1));
        let c = mat(3, 2, &[0, 1, 2, 0]);
        assert_eq!(c.mul(&c).unwrap(), mat(3, 2, &[2, 0, 0, 2]));
        assert_eq!(c.min_poly_fp(), FpPoly::from_i64(3, &[-2, 0, 1]));
    }

    #[test]
    fn min_poly_annihilates_and_is_minimal_exhaustive_m2_f3() {
        for idx in 0..81u64 {
            let e: Vec<u64> = (0..4).map(|i| idx / 3u64.pow(i) % 3).collect();
            let m = mat(3, 2, &e);
            let mp = m.min_poly();
            assert!(m.eval_poly(&mp).is_zero());
            let poly = FpPoly::new(3, mp);
            for (f, _) in crate::modring::poly_factor(&poly) {
                let (q, _) = poly.div_rem(&f);
                assert!(!m.eval_poly(q.coeffs()).is_zero(), "proper divisor annihilates");
            }
        }
    }

    #[test]
    fn solve_and_nullspace() {
        let m = mat(5, 2, &[1, 2, 2, 4]);
        assert_eq!(m.rank(), 1);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(m.mul_vec(&ns[0]).iter().all(|&x| x == 0));
        assert!(m.solve(&[1, 0]).is_none());
        let x = m.solve(&[1, 2]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![1, 2]);
        let inv = mat(5, 2, &[1, 2, 3, 4]).inverse().unwrap();
        assert_eq!(mat(5, 2, &[1, 2, 3, 4]).mul(&inv).unwrap(), DenseMatrix::identity(fp(5), 2));
    }

    #[test]
    fn fq_rank_sees_extension_eigenvalues() {
        // [[0,1],[2,0]] over F_3 has eigenvalues ±sqrt(2), which live in F_9.
        let fq = FqField::new(FpPoly::from_i64(3, &[-2, 0, 1])).unwrap();
        let c = FqMatrix::embed(fq.clone(), &mat(3, 2, &[0, 1, 2, 0]));
        let alpha = fq.raw_generator();
        assert_eq!(c.shift(&alpha).rank(), 1);
        assert_eq!(c.rank(), 2);
    }
}
