//! Matrix Gauss sums `Σ_{U mod p} e(Tr(SU + TU²)/p)`: brute force, and the
//! closed form from diagonalizing `Q(U) = Tr(TU²)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charsum::{gauss_constant, CharSum};
use crate::envelope::Envelope;
use crate::enumerate::{check_size, fold_tuples};
use crate::error::{Error, Result};
use crate::matrixcore::ModMatrix;
use crate::modring::{legendre, Modulus};
use crate::par::Exec;
use crate::sylvester::{kernel_dim_direct, sylvester_solve, Sign};

/// Cap on `p^{n²}` for brute-force Gauss sums.
pub const GAUSS_LIMIT: u128 = 100_000_000;

fn check_st(s: &ModMatrix, t: &ModMatrix) -> Result<(ModMatrix, ModMatrix)> {
    if s.n() != t.n() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", s.n(), t.n())));
    }
    if s.modulus().p() != t.modulus().p() {
        return Err(Error::ModulusMismatch(s.modulus().to_string(), t.modulus().to_string()));
    }
    Ok((s.mod_p(), t.mod_p()))
}

pub fn gauss_brute(s: &ModMatrix, t: &ModMatrix) -> Result<CharSum> {
    gauss_brute_with(Exec::default(), s, t)
}

pub fn gauss_brute_with(exec: Exec, s: &ModMatrix, t: &ModMatrix) -> Result<CharSum> {
    let (s, t) = check_st(s, t)?;
    let n = s.n();
    let r = s.modulus();
    let p = r.p();
    check_size(p, n * n, GAUSS_LIMIT)?;
    let (se, te) = (s.entries(), t.entries());
    let slices = fold_tuples(
        exec,
        p,
        n * n,
        || (vec![0i64; p as usize], vec![0u64; n * n]),
        |(counts, tu), u| {
            // Tr(SU) + Tr((TU)U)
            let mut phase = 0u64;
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0u64;
                    for c in 0..n {
                        acc += te[i * n + c] * u[c * n + j];
                    }
                    tu[i * n + j] = acc % p;
                }
            }
            for i in 0..n {
                for c in 0..n {
                    phase += (se[i * n + c] + tu[i * n + c]) * u[c * n + i];
                }
            }
            counts[(phase % p) as usize] += 1;
        },
    );
    let mut total = vec![0i64; p as usize];
    for (c, _) in slices {
        for (t, x) in total.iter_mut().zip(c) {
            *t += x;
        }
    }
    Ok(CharSum::from_counts(r, &total))
}

/// Congruence diagonalization of a symmetric matrix over `F_p`, `p` odd.
/// Returns the nonzero diagonal coefficients.
pub fn diagonalize_symmetric(r: Modulus, dim: usize, mut m: Vec<u64>) -> Vec<u64> {
    let at = |i: usize, j: usize| i * dim + j;
    let mut diag = Vec::new();
    for i in 0..dim {
        let pivot = (i..dim).find(|&j| m[at(j, j)] != 0);
        let pivot = match pivot {
            Some(j) => j,
            None => {
                let Some((j, k)) = (i..dim)
                    .flat_map(|j| (i..dim).map(move |k| (j, k)))
                    .find(|&(j, k)| j != k && m[at(j, k)] != 0)
                else {
                    break;
                };
                // e_j ← e_j + e_k makes the (j,j) entry 2·m[j][k] ≠ 0
                for c in 0..dim {
                    m[at(j, c)] = r.add(m[at(j, c)], m[at(k, c)]);
                }
                for c in 0..dim {
                    m[at(c, j)] = r.add(m[at(c, j)], m[at(c, k)]);
                }
                j
            }
        };
        if pivot != i {
            for c in 0..dim {
                m.swap(at(pivot, c), at(i, c));
            }
            for c in 0..dim {
                m.swap(at(c, pivot), at(c, i));
            }
        }
        let d = m[at(i, i)];
        let dinv = r.inv(d).expect("nonzero pivot");
        for row in i + 1..dim {
            let f = r.mul(m[at(row, i)], dinv);
            if f == 0 {
                continue;
            }
            for c in i..dim {
                m[at(row, c)] = r.sub(m[at(row, c)], r.mul(f, m[at(i, c)]));
            }
            for c in i..dim {
                m[at(c, row)] = r.sub(m[at(c, row)], r.mul(f, m[at(c, i)]));
            }
        }
        diag.push(d);
    }
    diag
}

/// Symmetric matrix of `U ↦ Tr(TU²)` on row-major coordinates `U = Σ u_{ab} E_{ab}`.
pub fn quadratic_form_matrix(t: &ModMatrix) -> Vec<u64> {
    let t = t.mod_p();
    let r = t.modulus();
    let n = t.n();
    let half = r.inv(2).expect("p odd");
    let big = n * n;
    let mut m = vec![0u64; big * big];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    // Tr(T(E_ab E_cd + E_cd E_ab))
                    let mut g = 0;
                    if b == c {
                        g = r.add(g, t.get(d, a));
                    }
                    if d == a {
                        g = r.add(g, t.get(b, c));
                    }
                    m[(a * n + b) * big + c * n + d] = r.mul(g, half);
                }
            }
        }
    }
    m
}

/// `legendre · g_p^{gp_power} · p^{p_power} · e(phase_num/p)`; `legendre = 0` means the sum is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussValue {
    pub legendre: i8,
    pub phase_num: u64,
    pub gp_power: u32,
    pub p_power: u32,
}

impl GaussValue {
    pub fn is_zero(&self) -> bool {
        self.legendre == 0
    }

    pub fn to_charsum(&self, p: u64) -> Result<CharSum> {
        let r = Modulus::prime(p)?;
        if self.is_zero() {
            return Ok(CharSum::zero(r));
        }
        let g = gauss_constant(p)?.power(self.gp_power, r)?;
        let scale = BigInt::from(self.legendre) * BigInt::from(p).pow(self.p_power);
        Ok(g.scale(&scale).rotate(self.phase_num))
    }

    pub fn to_complex(&self, p: u64) -> Result<Complex64> {
        Ok(self.to_charsum(p)?.to_complex())
    }

    /// The same data read with `p^{R/2}` in place of `g_p^R`.
    pub fn literal_complex(&self, p: u64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let mag = (p as f64).powf(self.p_power as f64 + self.gp_power as f64 / 2.0);
        let angle = 2.0 * std::f64::consts::PI * self.phase_num as f64 / p as f64;
        Complex64::from_polar(mag * self.legendre as f64, angle)
    }
}

/// Closed evaluation together with the intermediate data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussClosed {
    pub value: GaussValue,
    /// Rank `R` of `Q`.
    pub rank: u32,
    /// `dim {Y : TY + YT = 0}`.
    pub kernel_dim: u32,
    pub solvable: bool,
}

pub fn gauss_closed(s: &ModMatrix, t: &ModMatrix) -> Result<GaussValue> {
    Ok(gauss_closed_details(s, t)?.value)
}

pub fn gauss_closed_details(s: &ModMatrix, t: &ModMatrix) -> Result<GaussClosed> {
    let (s, t) = check_st(s, t)?;
    let r = s.modulus();
    let p = r.p();
    if p == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let n = s.n();
    let big = n * n;
    let diag = diagonalize_symmetric(r, big, quadratic_form_matrix(&t));
    let rank = diag.len() as u32;
    let kernel_dim = kernel_dim_direct(&t)? as u32;
    assert_eq!(rank as usize, big - kernel_dim as usize, "rank of Tr(TU²) disagrees with the Sylvester kernel");
    let sol = sylvester_solve(&t, &t, &s, Sign::Plus)?;
    let Some(y) = sol.particular else {
        let value = GaussValue { legendre: 0, phase_num: 0, gp_power: 0, p_power: 0 };
        return Ok(GaussClosed { value, rank, kernel_dim, solvable: false });
    };
    let det = diag.iter().fold(1u64, |acc, &d| r.mul(acc, d));
    let qy = t.mul(&y)?.mul(&y)?.trace();
    let value = GaussValue {
        legendre: legendre(det, p),
        phase_num: r.neg(qy),
        gp_power: rank,
        p_power: big as u32 - rank,
    };
    Ok(GaussClosed { value, rank, kernel_dim, solvable: true })
}

/// `p^{(n−r)² + r_∞²/2}` with `r`, `r_∞` the rank and stable rank of `T` mod `p`.
pub fn gauss_bound(t: &ModMatrix) -> Envelope {
    let t = t.mod_p();
    let n = t.n() as u64;
    let (r, ri) = (t.rank_mod_p() as u64, t.stable_rank() as u64);
    Envelope::new("gauss-rank", t.modulus().p(), 2 * (n - r) * (n - r) + ri * ri, 2)
}
