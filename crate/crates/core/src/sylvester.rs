//! Sylvester-type equations `Cl·Y ± Y·Cr = S` over `F_p`, kernel dimensions of
//! `Y ↦ CY + YC`, and the `p`-adic lifting step for `AX ≡ X^{-1}B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{FpMatrix, FqMatrix, ModMatrix, PrimeField};
use crate::modring::{poly_factor, FqField};
use crate::par::{map_items, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    /// `Cl·Y + Y·Cr`
    Plus,
    /// `Cl·Y − Y·Cr`
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SylvesterSolution {
    /// `None` when the system is inconsistent.
    pub particular: Option<ModMatrix>,
    /// Basis of the homogeneous solutions.
    pub kernel: Vec<ModMatrix>,
}

impl SylvesterSolution {
    pub fn is_solvable(&self) -> bool {
        self.particular.is_some()
    }
}

/// The `n² × n²` matrix of `Y ↦ Cl·Y ± Y·Cr` on row-major `vec(Y)`, over `F_p`.
pub fn operator_matrix(cl: &ModMatrix, cr: &ModMatrix, sign: Sign) -> Result<FpMatrix> {
    let (cl, cr) = (cl.mod_p(), cr.mod_p());
    if cl.n() != cr.n() || cl.modulus() != cr.modulus() {
        return Err(Error::DimensionMismatch("Sylvester coefficients".into()));
    }
    let n = cl.n();
    let r = cl.modulus();
    let field = PrimeField::from_modulus(r);
    let mut op = FpMatrix::zeros(field, n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for t in 0..n {
                let v = r.add(*op.get(row, t * n + j), cl.get(i, t));
                op.set(row, t * n + j, v);
                let c = match sign {
                    Sign::Plus => cr.get(t, j),
                    Sign::Minus => r.neg(cr.get(t, j)),
                };
                let v = r.add(*op.get(row, i * n + t), c);
                op.set(row, i * n + t, v);
            }
        }
    }
    Ok(op)
}

fn unflatten(n: usize, like: &ModMatrix, v: Vec<u64>) -> ModMatrix {
    ModMatrix::new(n, like.modulus(), v).expect("n² entries")
}

pub fn sylvester_solve(cl: &ModMatrix, cr: &ModMatrix, s: &ModMatrix, sign: Sign) -> Result<SylvesterSolution> {
    let op = operator_matrix(cl, cr, sign)?;
    let s = s.mod_p();
    if s.n() != cl.n() {
        return Err(Error::DimensionMismatch("right-hand side".into()));
    }
    let n = s.n();
    let particular = op.solve(s.entries()).map(|v| unflatten(n, &s, v));
    let kernel = op.nullspace().into_iter().map(|v| unflatten(n, &s, v)).collect();
    Ok(SylvesterSolution { particular, kernel })
}

/// `dim {Y : CY + YC = 0}` by row reduction of the flattened operator.
pub fn kernel_dim_direct(c: &ModMatrix) -> Result<usize> {
    let n = c.n();
    Ok(n * n - operator_matrix(c, c, Sign::Plus)?.rank())
}

/// For each irreducible factor `f` of the characteristic polynomial, with `α`
/// the class of `x` in `F_p[x]/(f)`: `deg f` and the kernel flags
/// `dim ker (C − α)^t`, `dim ker (C + α)^t` for `t = 0..=n`.
fn spectral_flags(c: &ModMatrix) -> Result<Vec<(usize, Vec<usize>, Vec<usize>)>> {
    let c = c.mod_p();
    if c.modulus().p() == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let n = c.n();
    let cf = c.to_fp();
    let mut out = Vec::new();
    for (f, _) in poly_factor(&c.charpoly_mod_p()) {
        let deg = f.degree().unwrap();
        let fq = FqField::new(f)?;
        let alpha = fq.raw_generator();
        let big = FqMatrix::embed(fq.clone(), &cf);
        let flag = |shift: &Vec<u64>| {
            let m = big.shift(shift);
            let mut dims = vec![0];
            let mut power = FqMatrix::identity(fq.clone(), n);
            for _ in 0..n {
                power = power.mul(&m).expect("square");
                dims.push(n - power.rank());
            }
            dims
        };
        out.push((deg, flag(&alpha), flag(&fq.raw_neg(&alpha))));
    }
    Ok(out)
}

/// `Σ_λ d(λ)d(−λ)` over eigenvalues `λ` in the algebraic closure, with
/// `d(λ) = dim ker(C − λ)` the geometric multiplicity.
pub fn kernel_dim_by_spectrum(c: &ModMatrix) -> Result<usize> {
    Ok(spectral_flags(c)?.into_iter().map(|(deg, plus, minus)| deg * plus[1] * minus[1]).sum())
}

/// `Σ_λ Σ_t d_t(λ)d_t(−λ)` with `d_t(λ) = dim ker(C − λ)^t − dim ker(C − λ)^{t−1}`,
/// the number of Jordan blocks of size at least `t`. This pairs every block of `λ`
/// with every block of `−λ`, each pair contributing the smaller size.
pub fn kernel_dim_by_jordan_spectrum(c: &ModMatrix) -> Result<usize> {
    Ok(spectral_flags(c)?
        .into_iter()
        .map(|(deg, plus, minus)| {
            let s: usize = (1..plus.len()).map(|t| (plus[t] - plus[t - 1]) * (minus[t] - minus[t - 1])).sum();
            deg * s
        })
        .sum())
}

/// Lifts of one solution `X₀` of `AX ≡ X^{-1}B (mod p^l)` to `Z/p^{l+1}Z`:
/// all `X₀(I + p^l Y)` with `CY + YC ≡ (X₀^{-1}B − AX₀)/p^l (mod p)`, `C = AX₀ mod p`.
pub fn lift_fiber(a: &ModMatrix, b: &ModMatrix, x0: &ModMatrix) -> Result<Vec<ModMatrix>> {
    let r = a.modulus();
    let l = r.k().checked_sub(1).filter(|&l| l >= 1).ok_or_else(|| {
        Error::InvalidInput("lifting needs a target exponent of at least 2".into())
    })?;
    let x0 = x0.lift_to(r.k())?;
    let ax0 = a.mul(&x0)?;
    let rhs = x0.inverse()?.mul(b)?.sub(&ax0)?;
    let rhs = rhs.div_p_pow(l)?;
    let c = ax0.mod_p();
    let sol = sylvester_solve(&c, &c, &rhs, Sign::Plus)?;
    let Some(y0) = sol.particular else {
        return Ok(Vec::new());
    };
    let p = r.p();
    let dim = sol.kernel.len();
    let pl = p.pow(l);
    let mut out = Vec::with_capacity(p.pow(dim as u32) as usize);
    let mut coeffs = vec![0u64; dim];
    let identity = ModMatrix::identity(a.n(), r);
    loop {
        let mut y = y0.clone();
        for (c, kv) in coeffs.iter().zip(&sol.kernel) {
            y = y.add(&kv.scale(*c))?;
        }
        let step = identity.add(&y.lift_to(r.k())?.scale(pl))?;
        out.push(x0.mul(&step)?);
        let mut i = 0;
        loop {
            if i == dim {
                return Ok(out);
            }
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// All lifts of a list of solutions mod `p^l`, fiber by fiber, in input order.
pub fn lift_solutions(a: &ModMatrix, b: &ModMatrix, solutions_mod_pl: &[ModMatrix]) -> Result<Vec<ModMatrix>> {
    lift_solutions_with(Exec::default(), a, b, solutions_mod_pl)
}

pub fn lift_solutions_with(
    exec: Exec,
    a: &ModMatrix,
    b: &ModMatrix,
    solutions_mod_pl: &[ModMatrix],
) -> Result<Vec<ModMatrix>> {
    let fibers = map_items(exec, solutions_mod_pl, |x0| lift_fiber(a, b, x0));
    let mut out = Vec::new();
    for f in fibers {
        out.extend(f?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::Modulus;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mm(p: u64, k: u32, text: &str) -> ModMatrix {
        ModMatrix::parse(text, Modulus::new(p, k).unwrap()).unwrap()
    }

    #[test]
    fn solve_examples() {
        let id = mm(5, 1, "1,0;0,1");
        let m = mm(5, 1, "1,2;3,4");
        let sol = sylvester_solve(&id, &id, &m.scale(2), Sign::Plus).unwrap();
        assert_eq!(sol.particular, Some(m));
        assert!(sol.kernel.is_empty());
        let d = mm(5, 1, "1,0;0,4");
        let sol = sylvester_solve(&d, &d, &ModMatrix::zero(2, d.modulus()), Sign::Plus).unwrap();
        assert_eq!(sol.kernel.len(), 2);
        for y in &sol.kernel {
            assert!(d.mul(y).unwrap().add(&y.mul(&d).unwrap()).unwrap().is_zero());
        }
        // commutant of a nonderogatory matrix has dimension n
        let j = mm(3, 1, "0,1;0,0");
        let sol = sylvester_solve(&j, &j, &ModMatrix::zero(2, j.modulus()), Sign::Minus).unwrap();
        assert_eq!(sol.kernel.len(), 2);
    }

    #[test]
    fn spectrum_examples() {
        assert_eq!(kernel_dim_by_spectrum(&mm(5, 1, "1,0;0,1")).unwrap(), 0);
        assert_eq!(kernel_dim_by_spectrum(&mm(5, 1, "1,0;0,4")).unwrap(), 2);
        assert_eq!(kernel_dim_by_spectrum(&ModMatrix::zero(3, Modulus::prime(5).unwrap())).unwrap(), 9);
        assert_eq!(kernel_dim_by_spectrum(&mm(2, 1, "1,0;0,1")), Err(Error::EvenCharacteristic));
    }

    #[test]
    fn geometric_multiplicity_formula_misses_nontrivial_jordan_blocks() {
        // CY + YC = 0 for C = [[0,1],[0,0]] forces y21 = 0 and y22 = -y11: a 2-dimensional kernel,
        // while d(0)·d(0) = 1.
        let j = mm(3, 1, "0,1;0,0");
        assert_eq!(kernel_dim_direct(&j).unwrap(), 2);
        assert_eq!(kernel_dim_by_spectrum(&j).unwrap(), 1);
        assert_eq!(kernel_dim_by_jordan_spectrum(&j).unwrap(), 2);
    }

    #[test]
    fn jordan_spectrum_matches_direct_exhaustive_m2_f3() {
        let r = Modulus::prime(3).unwrap();
        for idx in 0..81u64 {
            let c = ModMatrix::new(2, r, (0..4).map(|i| idx / 3u64.pow(i) % 3).collect()).unwrap();
            assert_eq!(kernel_dim_by_jordan_spectrum(&c).unwrap(), kernel_dim_direct(&c).unwrap(), "{c}");
        }
    }

    #[test]
    fn jordan_spectrum_matches_direct_random_m3_f5_and_m4_f3() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (n, p) in [(3usize, 5u64), (4, 3), (3, 7)] {
            let r = Modulus::prime(p).unwrap();
            for _ in 0..300 {
                // sprinkle in structured matrices so repeated eigenvalues occur
                let c = if rng.gen_bool(0.3) {
                    let mut m = ModMatrix::zero(n, r);
                    for i in 0..n {
                        m.set(i, i, rng.gen_range(0..2) * (p - 1));
                        if i + 1 < n {
                            m.set(i, i + 1, rng.gen_range(0..2));
                        }
                    }
                    m
                } else {
                    ModMatrix::new(n, r, (0..n * n).map(|_| rng.gen_range(0..p)).collect()).unwrap()
                };
                assert_eq!(kernel_dim_by_jordan_spectrum(&c).unwrap(), kernel_dim_direct(&c).unwrap(), "{c}");
                let mp = c.to_fp().min_poly_fp();
                let semisimple = mp.gcd(&mp.derivative()).degree() == Some(0);
                if semisimple {
                    assert_eq!(kernel_dim_by_spectrum(&c).unwrap(), kernel_dim_direct(&c).unwrap());
                }
            }
        }
    }

    #[test]
    fn lift_examples() {
        // A = B = I mod 9, X0 = I: I + 3Y works iff 2Y ≡ 0 mod 3, so only X = I.
        let a = mm(3, 2, "1,0;0,1");
        let x0 = mm(3, 1, "1,0;0,1");
        let lifts = lift_solutions(&a, &a, &[x0]).unwrap();
        assert_eq!(lifts, vec![a.clone()]);
        assert!(lift_solutions(&a, &a, &[]).unwrap().is_empty());
    }
}
