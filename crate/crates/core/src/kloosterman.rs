//! `K_n(A,B;p^k) = Σ_{X ∈ GL_n(Z/p^kZ)} e(Tr(AX + X^{-1}B)/p^k)` by brute
//! force, by reduction to solutions of `XAX ≡ B (mod p^l)`, and in closed
//! form when `AB` is regular semisimple mod `p`.

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::Serialize;

use crate::charsum::{CharSum, CharSumJson};
use crate::counting::solutions_lifted;
use crate::envelope::{Envelope, EnvelopeCheck};
use crate::enumerate::{check_size, fold_tuples, RingKernel, ENUMERATION_LIMIT};
use crate::error::{Error, Result};
use crate::gaussmat::{gauss_brute_with, gauss_closed};
use crate::matrixcore::ModMatrix;
use crate::modring::{FpPoly, Modulus};
use crate::par::{map_items, Exec};
use crate::sylvester::{sylvester_solve, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMethod {
    Brute,
    Reduced,
    Salie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub n: usize,
    pub p: u64,
    pub k: u32,
    pub a: String,
    pub b: String,
}

impl Instance {
    fn of(a: &ModMatrix, b: &ModMatrix) -> Self {
        let r = a.modulus();
        Instance { n: a.n(), p: r.p(), k: r.k(), a: a.to_string(), b: b.to_string() }
    }
}

/// Closed-form bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SalieDetails {
    /// Square roots of `AB` mod `p`.
    pub roots: usize,
    pub root_bound: u64,
    /// `p^{kn²/2} Σ_Y e(2 Tr Y/p^k)` with no correction for odd `k`.
    pub literal_re: f64,
    pub literal_im: f64,
    /// True for even `k`, where the literal form is already exact.
    pub literal_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub instance: Instance,
    pub method: EvalMethod,
    #[serde(skip)]
    pub sum: CharSum,
    #[serde(flatten)]
    pub value: CharSumJson,
    pub envelopes: Vec<EnvelopeCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub salie: Option<SalieDetails>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EvalResult {
    fn new(a: &ModMatrix, b: &ModMatrix, method: EvalMethod, sum: CharSum, mut envelopes: Vec<Envelope>) -> Self {
        let sum = sum.canonicalize();
        let mut warnings = Vec::new();
        match main_bounds(a, b) {
            Ok(env) => envelopes.extend(env),
            Err(_) => warnings.push("A ≡ B ≡ 0: the sum is |GL_n| and no bound applies".to_string()),
        }
        let mag = sum.magnitude();
        let envelopes = envelopes
            .into_iter()
            .map(|e| {
                let holds = !e.applicable || e.dominates_magnitude(mag);
                EnvelopeCheck { envelope: e, holds }
            })
            .collect();
        EvalResult {
            instance: Instance::of(a, b),
            method,
            value: sum.to_json(true),
            sum,
            envelopes,
            salie: None,
            warnings,
        }
    }

    pub fn complex(&self) -> Complex64 {
        self.sum.to_complex()
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

fn add_counts(total: &mut [i64], part: &[i64]) {
    for (t, x) in total.iter_mut().zip(part) {
        *t += x;
    }
}

/// Phase counts of `Tr(AX + X^{-1}B)` over all invertible `X`.
pub fn brute_sum(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<CharSum> {
    check_pair(a, b)?;
    let (n, r) = (a.n(), a.modulus());
    let m = r.m();
    check_size(m, n * n, ENUMERATION_LIMIT)?;
    let kern = RingKernel::new(n, r);
    let (ae, be) = (a.entries(), b.entries());
    let slices = fold_tuples(
        exec,
        m,
        n * n,
        || (vec![0i64; m as usize], vec![0u64; n * n]),
        |(counts, inv), x| {
            if !kern.inverse(x, inv) {
                return;
            }
            let phase = (kern.trace_mul(ae, x) + kern.trace_mul(inv, be)) % m;
            counts[phase as usize] += 1;
        },
    );
    let mut total = vec![0i64; m as usize];
    for (c, _) in &slices {
        add_counts(&mut total, c);
    }
    Ok(CharSum::from_counts(r, &total))
}

pub fn eval_brute(a: &ModMatrix, b: &ModMatrix) -> Result<EvalResult> {
    eval_brute_with(Exec::default(), a, b)
}

pub fn eval_brute_with(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<EvalResult> {
    let sum = brute_sum(exec, a, b)?;
    Ok(EvalResult::new(a, b, EvalMethod::Brute, sum, Vec::new()))
}

/// Phase counts over `X = base + p^j Z`, `Z` ranging over `(Z/p^{k-j})^{n²}`.
fn coset_counts(kern: &RingKernel, a: &[u64], b: &[u64], base: &[u64], j: u32) -> Vec<i64> {
    let r = kern.modulus;
    let (n, m) = (kern.n, r.m());
    let step = r.p().pow(j);
    let width = r.p().pow(r.k() - j);
    let mut counts = vec![0i64; m as usize];
    let mut x = vec![0u64; n * n];
    let mut inv = vec![0u64; n * n];
    let mut z = vec![0u64; n * n];
    loop {
        for i in 0..n * n {
            x[i] = (base[i] + step * z[i]) % m;
        }
        if kern.inverse(&x, &mut inv) {
            counts[((kern.trace_mul(a, &x) + kern.trace_mul(&inv, b)) % m) as usize] += 1;
        }
        let mut i = n * n;
        loop {
            if i == 0 {
                return counts;
            }
            i -= 1;
            z[i] += 1;
            if z[i] < width {
                break;
            }
            z[i] = 0;
        }
    }
}

/// Sum over solutions of `XAX ≡ B (mod p^l)`, weighted by the mod-`p` Gauss
/// factor when `k` is odd.
pub fn reduced_sum(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<CharSum> {
    check_pair(a, b)?;
    let (n, r) = (a.n(), a.modulus());
    let (p, k) = (r.p(), r.k());
    if k < 2 {
        return Err(Error::InvalidInput("the reduction needs k ≥ 2".into()));
    }
    let l = k / 2;
    let sols = solutions_lifted(exec, &a.reduce_to(l)?, &b.reduce_to(l)?)?;
    let per_solution = (k - l) as usize * n * n;
    check_size(p, per_solution, ENUMERATION_LIMIT / sols.len().max(1) as u128)?;
    let kern = RingKernel::new(n, r);
    let (ae, be) = (a.entries(), b.entries());
    if k % 2 == 0 {
        let parts = map_items(exec, &sols, |x0| coset_counts(&kern, ae, be, x0.entries(), l));
        let mut total = vec![0i64; r.m() as usize];
        for c in &parts {
            add_counts(&mut total, c);
        }
        return Ok(CharSum::from_counts(r, &total));
    }
    // Odd k: fix X mod p^{l+1}, which determines the Gauss factor.
    let rl1 = r.with_exponent(l + 1)?;
    let pl = p.pow(l);
    let parts = map_items(exec, &sols, |x0| -> Result<CharSum> {
        let mut acc = CharSum::zero(r);
        let tuples = fold_tuples(Exec::Sequential, p, n * n, Vec::new, |v: &mut Vec<Vec<u64>>, z| v.push(z.to_vec()));
        for z1 in tuples.into_iter().flatten() {
            let x1: Vec<u64> = x0.entries().iter().zip(&z1).map(|(&x, &z)| x + pl * z).collect();
            let x1m = ModMatrix::new(n, rl1, x1.clone())?;
            let (a1, b1) = (a.reduce_to(l + 1)?, b.reduce_to(l + 1)?);
            let ax = a1.mul(&x1m)?;
            let s = ax.sub(&x1m.inverse()?.mul(&b1)?)?.div_p_pow(l)?;
            let g = gauss_brute_with(Exec::Sequential, &s, &ax.mod_p())?;
            if g.is_zero_value() {
                continue;
            }
            let inner = CharSum::from_counts(r, &coset_counts(&kern, ae, be, &x1, l + 1));
            acc.merge(&inner.mul(&g.embed(r)?)?)?;
        }
        Ok(acc)
    });
    let mut total = CharSum::zero(r);
    for part in parts {
        total.merge(&part?)?;
    }
    total.div_exact(&BigInt::from(p).pow((n * n) as u32))
}

pub fn eval_reduced(a: &ModMatrix, b: &ModMatrix) -> Result<EvalResult> {
    eval_reduced_with(Exec::default(), a, b)
}

pub fn eval_reduced_with(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<EvalResult> {
    let sum = reduced_sum(exec, a, b)?;
    Ok(EvalResult::new(a, b, EvalMethod::Reduced, sum, Vec::new()))
}

/// Squarefree characteristic polynomial mod `p`; the witness is `gcd(χ, χ′)`.
pub fn regular_semisimple_test(m: &ModMatrix) -> (bool, FpPoly) {
    let chi = m.charpoly_mod_p();
    let g = chi.gcd(&chi.derivative());
    (g.degree() == Some(0), g)
}

/// Square roots of `C` in `M_n(F_p)`.
pub fn square_roots_mod_p(exec: Exec, c: &ModMatrix) -> Result<Vec<ModMatrix>> {
    let c = c.mod_p();
    let (n, r) = (c.n(), c.modulus());
    check_size(r.p(), n * n, ENUMERATION_LIMIT)?;
    let kern = RingKernel::new(n, r);
    let ce = c.entries();
    let tr = c.trace();
    let parts = fold_tuples(
        exec,
        r.p(),
        n * n,
        || (Vec::new(), vec![0u64; n * n]),
        |(acc, sq): &mut (Vec<ModMatrix>, Vec<u64>), y| {
            if kern.trace_mul(y, y) != tr {
                return;
            }
            kern.mul(y, y, sq);
            if sq == ce {
                acc.push(ModMatrix::new(n, r, y.to_vec()).expect("n² entries"));
            }
        },
    );
    Ok(parts.into_iter().flat_map(|(v, _)| v).collect())
}

/// Hensel lift of `Y₀² ≡ C (mod p)` to `Y² ≡ C (mod p^k)`.
pub fn hensel_lift(c: &ModMatrix, y0: &ModMatrix) -> Result<ModMatrix> {
    let r = c.modulus();
    let y0p = y0.mod_p();
    let mut y = y0p.lift_to(r.k())?;
    for j in 1..r.k() {
        let resid = c.sub(&y.mul(&y)?)?.div_p_pow(j)?;
        let sol = sylvester_solve(&y0p, &y0p, &resid, Sign::Plus)?;
        let delta = sol.particular.ok_or(Error::SingularLift)?;
        y = y.add(&delta.lift_to(r.k())?.scale(r.p().pow(j)))?;
    }
    Ok(y)
}

pub fn eval_salie(a: &ModMatrix, b: &ModMatrix) -> Result<EvalResult> {
    eval_salie_with(Exec::default(), a, b)
}

pub fn eval_salie_with(exec: Exec, a: &ModMatrix, b: &ModMatrix) -> Result<EvalResult> {
    check_pair(a, b)?;
    let (n, r) = (a.n(), a.modulus());
    let (p, k) = (r.p(), r.k());
    if p == 2 {
        return Err(Error::EvenCharacteristic);
    }
    let c = a.mul(b)?;
    if !r.is_unit(c.det()) {
        return Err(Error::InvalidInput("det(AB) must be a unit mod p".into()));
    }
    if !regular_semisimple_test(&c).0 {
        return Err(Error::NotRegularSemisimple);
    }
    let roots = square_roots_mod_p(exec, &c)?;
    let root_bound = 1u64 << n;
    assert!(roots.len() as u64 <= root_bound, "more than 2^n square roots of a regular semisimple matrix");
    let nn = (n * n) as u32;
    let l = k / 2;
    let mut sum = CharSum::zero(r);
    let mut literal = Complex64::new(0.0, 0.0);
    for y0 in &roots {
        let chi = y0.charpoly_mod_p();
        if chi.gcd(&chi.negated_roots()).degree() != Some(0) {
            return Err(Error::SingularLift);
        }
        let y = hensel_lift(&c, y0)?;
        let phase = r.mul(2, y.trace());
        literal += Complex64::from_polar(1.0, std::f64::consts::TAU * phase as f64 / r.m() as f64);
        let term = if k % 2 == 0 {
            CharSum::from_integer(r, BigInt::from(p).pow(l * nn))
        } else {
            let g = gauss_closed(&ModMatrix::zero(n, y0.modulus()), y0)?.to_charsum(p)?.embed(r)?;
            g.scale(&BigInt::from(p).pow(l * nn))
        };
        sum.merge(&term.rotate(phase))?;
    }
    literal *= (p as f64).powf(k as f64 * nn as f64 / 2.0);
    let envelope = Envelope::with_coefficient("closed-form-magnitude", p, k as u64 * nn as u64, 2, root_bound, 1);
    let mut res = EvalResult::new(a, b, EvalMethod::Salie, sum, vec![envelope]);
    res.salie = Some(SalieDetails {
        roots: roots.len(),
        root_bound,
        literal_re: literal.re,
        literal_im: literal.im,
        literal_exact: k % 2 == 0,
    });
    Ok(res)
}

/// Distance from `z` to the nearest `p`-th root of unity.
pub fn distance_to_pth_root(z: Complex64, p: u64) -> f64 {
    (0..p)
        .map(|j| (z - Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / p as f64)).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Upper bounds for `|K_n(A,B;p^k)|`; errors when `A ≡ B ≡ 0`.
pub fn main_bounds(a: &ModMatrix, b: &ModMatrix) -> Result<Vec<Envelope>> {
    check_pair(a, b)?;
    if a.is_zero() && b.is_zero() {
        return Err(Error::BothZero);
    }
    let r = a.modulus();
    let (p, k, n) = (r.p(), r.k() as u64, a.n() as u64);
    let (ua, ub) = (r.is_unit(a.det()), r.is_unit(b.det()));
    let unit = ua || ub;
    if k == 1 {
        let regular = ub && {
            let binv = b.inverse()?;
            regular_semisimple_test(&a.mul(&binv)?).0
        };
        return Ok(vec![
            Envelope::with_coefficient("weil-generic", p, n * n - n + 1, 1, 2, 1),
            Envelope::with_coefficient("weil-unit-det", p, 3 * n * n, 4, 4, 1).applicable(unit),
            Envelope::with_coefficient("weil-regular", p, n * n, 2, 4, 1).applicable(regular),
        ]);
    }
    let c = k.div_ceil(2);
    Ok(vec![
        Envelope::new("prime-power-generic", p, k * n * n - c * (2 * n - 2), 1),
        Envelope::new("prime-power-unit-det", p, 2 * k * n * n - c * n * n, 2).applicable(unit),
    ])
}

/// `|GL_n(Z/p^kZ)|`.
pub fn gl_order_mod(n: usize, r: Modulus) -> BigInt {
    let p = BigInt::from(r.p());
    let q = r.p();
    let mut ord = BigInt::from(1);
    for i in 0..n as u32 {
        ord *= BigInt::from(q.pow(n as u32)) - BigInt::from(q.pow(i));
    }
    ord * p.pow((r.k() - 1) * (n * n) as u32)
}
