//! `N*(A,B;p^l) = #{X ∈ GL_n(Z/p^lZ) : AX ≡ X^{-1}B}` by enumeration, by
//! lifting, and for `l = 1` through primary components and partition formulas.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::envelope::{Envelope, EnvelopeCheck};
use crate::enumerate::{check_size, fold_tuples, RingKernel, ENUMERATION_LIMIT};
use crate::error::{Error, Result};
use crate::matrixcore::{jordan_type, primary_decomposition, ModMatrix};
use crate::modring::{residue_symbol, FpPoly};
use crate::par::Exec;
use crate::partitions::Partition;
use crate::sylvester::lift_solutions_with;

pub(crate) fn serialize_decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Brute,
    Lifted,
    Closed,
}

/// Per-component data of the closed formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub f: String,
    pub degree: usize,
    pub multiplicity: u32,
    pub dim: usize,
    /// `(x/f)`; zero exactly when `f = x`.
    pub symbol: i8,
    pub partition: Partition,
    #[serde(serialize_with = "serialize_decimal")]
    pub count: BigUint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    #[serde(serialize_with = "serialize_decimal")]
    pub value: BigUint,
    pub method: CountMethod,
    pub components: Vec<ComponentReport>,
    pub envelopes: Vec<EnvelopeCheck>,
}

impl CountReport {
    fn new(value: BigUint, method: CountMethod, components: Vec<ComponentReport>, envelopes: Vec<Envelope>) -> Self {
        let envelopes = envelopes
            .into_iter()
            .map(|e| {
                let holds = !e.applicable || e.dominates_count(&value);
                EnvelopeCheck { envelope: e, holds }
            })
            .collect();
        CountReport { value, method, components, envelopes }
    }
}

fn check_pair(a: &ModMatrix, b: &ModMatrix) -> Result<()> {
    if a.modulus() != b.modulus() {
        return Err(Error::ModulusMismatch(a.modulus().to_string(), b.modulus().to_string()));
    }
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.n(), b.n())));
    }
    Ok(())
}

/// Every `X` mod `p^l` with `XAX ≡ B`, in odometer order (`l` = exponent of the inputs).
pub fn solutions_brute(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<Vec<ModMatrix>> {
    check_pair(a, b)?;
    let (n, r) = (a.n(), a.modulus());
    check_size(r.m(), n * n, ENUMERATION_LIMIT)?;
    let kern = RingKernel::new(n, r);
    let (ae, be) = (a.entries(), b.entries());
    let slices = fold_tuples(exec, r.m(), n * n, Vec::new, |acc: &mut Vec<ModMatrix>, x| {
        if !kern.is_invertible(x) {
            return;
        }
        let mut xa = vec![0u64; n * n];
        let mut xax = vec![0u64; n * n];
        kern.mul(x, ae, &mut xa);
        kern.mul(&xa, x, &mut xax);
        if xax == be {
            acc.push(ModMatrix::new(n, r, x.to_vec()).expect("n² entries"));
        }
    });
    Ok(slices.into_iter().flatten().collect())
}

pub fn count_brute(a: &ModMatrix, b: &ModMatrix) -> Result<BigUint> {
    count_brute_with(Exec::default(), a, b)
}

pub fn count_brute_with(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<BigUint> {
    check_pair(a, b)?;
    let (n, r) = (a.n(), a.modulus());
    check_size(r.m(), n * n, ENUMERATION_LIMIT)?;
    let kern = RingKernel::new(n, r);
    let (ae, be) = (a.entries(), b.entries());
    let counts = fold_tuples(
        exec,
        r.m(),
        n * n,
        || (0u64, vec![0u64; n * n], vec![0u64; n * n]),
        |(count, xa, xax), x| {
            if !kern.is_invertible(x) {
                return;
            }
            kern.mul(x, ae, xa);
            kern.mul(xa, x, xax);
            if xax == be {
                *count += 1;
            }
        },
    );
    Ok(counts.into_iter().map(|(c, _, _)| BigUint::from(c)).sum())
}

/// Solutions mod `p^l`: enumerate mod `p`, then lift one level at a time.
pub fn solutions_lifted(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<Vec<ModMatrix>> {
    check_pair(a, b)?;
    let l = a.modulus().k();
    let mut sols = solutions_brute(exec, &a.mod_p(), &b.mod_p())?;
    for j in 2..=l {
        sols = lift_solutions_with(exec, &a.reduce_to(j)?, &b.reduce_to(j)?, &sols)?;
    }
    Ok(sols)
}

pub fn count_lifted(a: &ModMatrix, b: &ModMatrix) -> Result<BigUint> {
    Ok(BigUint::from(solutions_lifted(Exec::default(), a, b)?.len()))
}

/// `#{Y ∈ GL : Y² = N_λ-twisted}` for the split case: `Σ_{λ=μ+ν} Z(λ)/(Z(μ)Z(ν))` over `F_q`.
pub fn split_count(lambda: &Partition, q: &BigUint) -> Result<BigUint> {
    let zl = lambda.centralizer_order(q);
    let mut total = BigRational::zero();
    for (mu, nu) in lambda.decompositions() {
        let den = mu.centralizer_order(q) * nu.centralizer_order(q);
        total += BigRational::new(zl.clone().into(), den.into());
    }
    if !total.is_integer() {
        return Err(Error::MalformedComponent(format!("split count for {lambda} is not an integer")));
    }
    Ok(total.to_integer().to_biguint().expect("nonnegative"))
}

/// Non-split case: `Z_{GL(F_q)}(N_λ) / Z_{GL(F_{q²})}(N_μ)` with `λ = μ + μ`.
pub fn nonsplit_count(lambda: &Partition, q: &BigUint) -> Result<BigUint> {
    let mu = lambda
        .halve()
        .ok_or_else(|| Error::MalformedComponent(format!("dual of {lambda} has an odd part")))?;
    let num = lambda.centralizer_order(q);
    let den = mu.centralizer_order(&(q * q));
    if (&num % &den) != BigUint::zero() {
        return Err(Error::MalformedComponent(format!("non-split count for {lambda} is not an integer")));
    }
    Ok(num / den)
}

/// `N*(C,C;p)` for `p` odd from the primary decomposition of `C²`.
pub fn count_closed_mod_p(c: &ModMatrix) -> Result<CountReport> {
    let c = c.mod_p();
    let p = c.modulus().p();
    if p == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let dec = primary_decomposition(&c)?;
    let mut total = BigUint::one();
    let mut components = Vec::new();
    for comp in &dec.components {
        let jt = jordan_type(comp)?;
        let degree = comp.degree();
        let q = BigUint::from(p).pow(degree as u32);
        let symbol = if comp.is_nilpotent() { 0 } else { residue_symbol(&FpPoly::x(p), &comp.f)? };
        let count = match symbol {
            1 => split_count(&jt.partition, &q)?,
            -1 => nonsplit_count(&jt.partition, &q)?,
            _ => jt.partition.centralizer_order(&q),
        };
        total *= &count;
        components.push(ComponentReport {
            f: comp.f.to_string(),
            degree,
            multiplicity: comp.multiplicity,
            dim: comp.dim(),
            symbol,
            partition: jt.partition,
            count,
        });
    }
    let mut envelopes = bound_envelopes(&c, &c);
    envelopes.extend(square_root_envelopes(&c)?);
    Ok(CountReport::new(total, CountMethod::Closed, components, envelopes))
}

/// Report wrapper for the enumeration and lifting methods.
pub fn count_report(a: &ModMatrix, b: &ModMatrix, method: CountMethod, exec: Exec) -> Result<CountReport> {
    let value = match method {
        CountMethod::Brute => count_brute_with(exec, a, b)?,
        CountMethod::Lifted => BigUint::from(solutions_lifted(exec, a, b)?.len()),
        CountMethod::Closed => {
            if a.modulus().k() != 1 {
                return Err(Error::InvalidInput("the closed formula counts modulo p only".into()));
            }
            return match normalize_with(exec, a, b)? {
                Normalization::Equivalent { c, .. } => {
                    let mut rep = count_closed_mod_p(&c)?;
                    let mut envelopes = bound_envelopes(a, b);
                    envelopes.extend(square_root_envelopes(&c)?);
                    rep = CountReport::new(rep.value, CountMethod::Closed, rep.components, envelopes);
                    Ok(rep)
                }
                Normalization::NotEquivalent => {
                    Ok(CountReport::new(BigUint::zero(), CountMethod::Closed, Vec::new(), bound_envelopes(a, b)))
                }
            };
        }
    };
    let mut envelopes = bound_envelopes(a, b);
    if a.modulus().k() == 1 && a == b && a.modulus().p() != 2 {
        envelopes.extend(square_root_envelopes(a)?);
    }
    Ok(CountReport::new(value, method, Vec::new(), envelopes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalization {
    /// `N*(A,B) = N*(C,C)` with `C = XA` for the witness `X`.
    Equivalent { c: ModMatrix, witness: ModMatrix },
    NotEquivalent,
}

pub fn normalize(a: &ModMatrix, b: &ModMatrix) -> Result<Normalization> {
    normalize_with(Exec::default(), a, b)
}

/// Uses the first solution in enumeration order as the witness.
pub fn normalize_with(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<Normalization> {
    Ok(match normalizations(exec, a, b)?.into_iter().next() {
        Some(n) => n,
        None => Normalization::NotEquivalent,
    })
}

/// One normalization per solution `X`.
pub fn normalizations(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<Vec<Normalization>> {
    let sols = solutions_lifted(exec, a, b)?;
    sols.into_iter()
        .map(|x| Ok(Normalization::Equivalent { c: x.mul(a)?, witness: x }))
        .collect()
}

/// Rank-based envelopes, valid for any level `l` (the exponent of the inputs).
pub fn bound_envelopes(a: &ModMatrix, b: &ModMatrix) -> Vec<Envelope> {
    let n = a.n() as u64;
    let p = a.modulus().p();
    let l = a.modulus().k() as u64;
    let (r, ri) = (a.rank_mod_p() as u64, a.stable_rank() as u64);
    let (s, si) = (b.rank_mod_p() as u64, b.stable_rank() as u64);
    let applicable = r == s && r > 0 && ri == si;
    // l((n−r)² + r_∞²/2) + (r − r_∞)², doubled to keep the exponent integral
    let twice = l * (2 * (n - r) * (n - r) + ri * ri) + 2 * (r - ri) * (r - ri);
    vec![
        Envelope::new("rank-refined", p, twice, 2).applicable(applicable),
        Envelope::new("rank-generic", p, l * (n * n - 2 * n + 2), 1).applicable(applicable),
    ]
}

/// Envelopes for `N*(C,C;p)` that depend on the shape of `C` itself.
pub fn square_root_envelopes(c: &ModMatrix) -> Result<Vec<Envelope>> {
    let c = c.mod_p();
    let p = c.modulus().p();
    let n = c.n() as u64;
    let mut out = Vec::new();
    // The primary hypothesis concerns C², as in the decomposition above.
    let mp = c.mul(&c)?.to_fp().min_poly_fp();
    let factors = crate::modring::poly_factor(&mp);
    let single_non_x = factors.len() == 1 && factors[0].0 != FpPoly::x(p) && p != 2;
    let deg = factors.first().map_or(1, |(f, _)| f.degree().unwrap_or(1)) as u64;
    {
        let n1 = n / deg;
        let q = p.pow(deg as u32);
        let exp = deg * ((n1 * n1) / 2);
        out.push(
            Envelope::with_coefficient("primary-strict", p, exp, 1, q * q + 1, q * q - 1)
                .applicable(single_non_x && n.is_multiple_of(deg)),
        );
        out.push(Envelope::with_coefficient("primary-coarse", p, n * n, 2 * deg, 2, 1).applicable(single_non_x));
    }
    let nilpotent = c.pow(c.n() as u64).is_zero();
    let (dual_sq, rk) = if nilpotent {
        let dims: Vec<usize> = (0..=c.n()).map(|j| c.n() - c.pow(j as u64).rank_mod_p()).collect();
        let d: Vec<u32> = dims.windows(2).map(|w| (w[1] - w[0]) as u32).collect();
        let lam = Partition::new(d).dual();
        (lam.sum_dual_squares() as u64, c.rank_mod_p() as u64)
    } else {
        (0, 0)
    };
    out.push(Envelope::new("nilpotent-dual", p, dual_sq, 1).applicable(nilpotent));
    out.push(Envelope::new("nilpotent-rank", p, rk * rk + (n - rk) * (n - rk), 1).applicable(nilpotent));
    Ok(out)
}

/// Exponent bound on the number of lifts in one fiber: `p^{(n−r)² + r_∞²/2}`
/// with `r`, `r_∞` the rank and stable rank of `C = AX₀ mod p`.
pub fn fiber_envelope(c: &ModMatrix) -> Envelope {
    let n = c.n() as u64;
    let (r, ri) = (c.rank_mod_p() as u64, c.stable_rank() as u64);
    Envelope::new("lifting-fiber", c.modulus().p(), 2 * (n - r) * (n - r) + ri * ri, 2)
}
