use serde::Serialize;

use super::dense::{FpMatrix, PrimeField};
use super::modmatrix::ModMatrix;
use crate::error::{Error, Result};
use crate::modring::{poly_factor, FpPoly};
use crate::partitions::Partition;

/// One primary piece `V_j = ker f_j(C²)^{k_j}` of `F_p^n` for a matrix `C` over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimaryComponent {
    /// Irreducible factor of the minimal polynomial of `C²`.
    pub f: FpPoly,
    /// Its multiplicity `k_j` in that minimal polynomial.
    pub multiplicity: u32,
    /// Basis of `V_j` as the columns of an `n × dim` matrix.
    pub basis: FpMatrix,
    /// `C|_{V_j}` written in that basis.
    pub restricted: ModMatrix,
}

impl PrimaryComponent {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn degree(&self) -> usize {
        self.f.degree().unwrap_or(0)
    }

    pub fn is_nilpotent(&self) -> bool {
        self.f == FpPoly::x(self.f.p())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimaryDecomposition {
    pub components: Vec<PrimaryComponent>,
    /// Columns are the concatenated component bases; `P^{-1} C P` is block diagonal.
    pub change_of_basis: ModMatrix,
}

/// Partition data attached to a component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JordanType {
    pub partition: Partition,
    /// `deg f`; the component has `F_p`-dimension `deg f · |λ|`.
    pub degree: usize,
}

/// Dimensions of `ker M^i` for `i = 0..=steps`.
fn kernel_flag(m: &FpMatrix, steps: usize) -> Vec<usize> {
    let n = m.rows();
    let mut dims = vec![0];
    let mut power = FpMatrix::identity(*m.field(), n);
    for _ in 0..steps {
        power = power.mul(m).expect("square");
        dims.push(n - power.rank());
    }
    dims
}

/// Partition whose dual has the successive increments of a kernel flag as parts.
fn partition_from_flag(dims: &[usize], scale: usize) -> Result<Partition> {
    let mut d = Vec::new();
    for w in dims.windows(2) {
        let inc = w[1] - w[0];
        if inc % scale != 0 {
            return Err(Error::MalformedComponent(format!(
                "kernel increment {inc} not divisible by degree {scale}"
            )));
        }
        d.push((inc / scale) as u32);
    }
    Ok(Partition::new(d).dual())
}

/// Split `F_p^n` along the irreducible factors of the minimal polynomial of `C²`.
pub fn primary_decomposition(c: &ModMatrix) -> Result<PrimaryDecomposition> {
    let c = c.mod_p();
    let n = c.n();
    let cf = c.to_fp();
    let field = *cf.field();
    let c2 = cf.mul(&cf)?;
    let m = c2.min_poly_fp();
    let mut columns: Vec<Vec<u64>> = Vec::new();
    let mut pieces = Vec::new();
    for (f, k) in poly_factor(&m) {
        let fk = f.pow(k);
        let kernel = c2.eval_poly(fk.coeffs()).nullspace();
        pieces.push((f, k, kernel.len()));
        columns.extend(kernel);
    }
    let p_mat = FpMatrix::from_columns(field, n, &columns);
    let p_inv = p_mat
        .inverse()
        .ok_or_else(|| Error::MalformedComponent("primary subspaces do not span".into()))?;
    let block = p_inv.mul(&cf)?.mul(&p_mat)?;
    let mut components = Vec::new();
    let mut offset = 0;
    for (f, k, dim) in pieces {
        let restricted = FpMatrix::from_fn(field, dim, dim, |i, j| *block.get(offset + i, offset + j));
        let basis = FpMatrix::from_columns(field, n, &columns[offset..offset + dim]);
        components.push(PrimaryComponent {
            f,
            multiplicity: k,
            basis,
            restricted: ModMatrix::from_fp(&restricted),
        });
        offset += dim;
    }
    Ok(PrimaryDecomposition { components, change_of_basis: ModMatrix::from_fp(&p_mat) })
}

/// The partition attached to a primary component, recovered from kernel
/// dimensions without building a Jordan basis.
///
/// For `f = x` this is the Jordan type of the nilpotent `C_j` itself, read from
/// `dim ker C_j^i`. Otherwise `λ'` has parts `(1/deg f)·(dim ker f(C_j²)^i − dim ker f(C_j²)^{i−1})`.
pub fn jordan_type(component: &PrimaryComponent) -> Result<JordanType> {
    let cj = component.restricted.to_fp();
    let dim = component.dim();
    let degree = component.degree();
    let partition = if component.is_nilpotent() {
        partition_from_flag(&kernel_flag(&cj, dim), 1)?
    } else {
        let c2 = cj.mul(&cj)?;
        let fc = c2.eval_poly(component.f.coeffs());
        partition_from_flag(&kernel_flag(&fc, dim), degree)?
    };
    if partition.size() as usize * degree != dim {
        return Err(Error::MalformedComponent(format!(
            "partition {partition} of degree {degree} does not fill dimension {dim}"
        )));
    }
    Ok(JordanType { partition, degree })
}

/// Jordan type of the nilpotent part of `C²` on a component, following the
/// kernel-flag convention of the `f ≠ x` case also for `f = x`.
pub fn square_jordan_type(component: &PrimaryComponent) -> Result<JordanType> {
    let cj = component.restricted.to_fp();
    let c2 = cj.mul(&cj)?;
    let fc = c2.eval_poly(component.f.coeffs());
    let degree = component.degree();
    Ok(JordanType { partition: partition_from_flag(&kernel_flag(&fc, component.dim()), degree)?, degree })
}

/// Convenience: an `F_p` matrix view of a mod-`p` [`ModMatrix`].
pub fn prime_field_of(c: &ModMatrix) -> PrimeField {
    PrimeField::from_modulus(c.modulus())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::Modulus;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mm(p: u64, text: &str) -> ModMatrix {
        ModMatrix::parse(text, Modulus::prime(p).unwrap()).unwrap()
    }

    #[test]
    fn decomposition_examples() {
        let d = primary_decomposition(&mm(3, "1,0;0,0")).unwrap();
        let fs: Vec<(FpPoly, usize)> = d.components.iter().map(|c| (c.f.clone(), c.dim())).collect();
        assert_eq!(fs, vec![(FpPoly::x(3), 1), (FpPoly::linear(3, 1), 1)]);

        let d = primary_decomposition(&mm(3, "0,1;0,0")).unwrap();
        assert_eq!(d.components.len(), 1);
        assert!(d.components[0].is_nilpotent());

        let c = mm(3, "0,1;2,0");
        assert_eq!(c.mul(&c).unwrap(), mm(3, "2,0;0,2"));
        let d = primary_decomposition(&c).unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].f, FpPoly::linear(3, 2));
        assert_eq!(d.components[0].dim(), 2);
    }

    #[test]
    fn jordan_type_examples() {
        let one = |text: &str, p: u64| {
            let d = primary_decomposition(&mm(p, text)).unwrap();
            jordan_type(&d.components[0]).unwrap().partition
        };
        assert_eq!(one("0,1;0,0", 3), Partition::new(vec![2]));
        assert_eq!(one("0,0,0;0,0,0;0,0,0", 3), Partition::new(vec![1, 1, 1]));
        assert_eq!(one("0,1;2,0", 3), Partition::new(vec![1, 1]));
    }

    #[test]
    fn decomposition_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, n) in [(3u64, 2usize), (3, 3), (3, 4), (5, 3), (7, 4)] {
            let r = Modulus::prime(p).unwrap();
            for _ in 0..100 {
                let c = ModMatrix::new(n, r, (0..n * n).map(|_| rng.gen_range(0..p)).collect()).unwrap();
                let d = primary_decomposition(&c).unwrap();
                assert_eq!(d.components.iter().map(|x| x.dim()).sum::<usize>(), n);
                let pinv = d.change_of_basis.inverse().unwrap();
                let conj = pinv.mul(&c).unwrap().mul(&d.change_of_basis).unwrap();
                let mut off = 0;
                for comp in &d.components {
                    let cj = comp.restricted.to_fp();
                    let mp = cj.mul(&cj).unwrap().min_poly_fp();
                    assert_eq!(mp, comp.f.pow(comp.multiplicity));
                    for i in 0..comp.dim() {
                        for j in 0..comp.dim() {
                            assert_eq!(conj.get(off + i, off + j), comp.restricted.get(i, j));
                        }
                    }
                    let jt = jordan_type(comp).unwrap();
                    assert_eq!(jt.partition.size() as usize * jt.degree, comp.dim());
                    assert_eq!(jt.partition.dual().dual(), jt.partition);
                    off += comp.dim();
                }
                // block diagonal: everything outside the blocks vanishes
                let mut starts = vec![];
                let mut o = 0;
                for comp in &d.components {
                    starts.push((o, o + comp.dim()));
                    o += comp.dim();
                }
                let block_of = |i: usize| starts.iter().position(|&(a, b)| a <= i && i < b).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        if block_of(i) != block_of(j) {
                            assert_eq!(conj.get(i, j), 0);
                        }
                    }
                }
            }
        }
    }
}
