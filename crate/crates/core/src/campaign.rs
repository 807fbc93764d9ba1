//! Seeded verification suites and result tables.
//!
//! Every instance list is drawn from a generator seeded by `(seed, tag)`
//! before any evaluation starts, and per-instance work is mapped in index
//! order, so reports are byte-identical for any worker count.

use std::fmt;

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::counting::{
    bound_envelopes, count_brute_with, count_closed_mod_p, fiber_envelope, normalizations, solutions_brute,
    square_root_envelopes, Normalization,
};
use crate::envelope::Envelope;
use crate::enumerate::{fold_tuples, RingKernel};
use crate::error::{Error, Result};
use crate::gaussmat::{gauss_bound, gauss_brute_with, gauss_closed, gauss_closed_details};
use crate::kloosterman::{
    brute_sum, distance_to_pth_root, eval_salie_with, main_bounds, reduced_sum, regular_semisimple_test,
};
use crate::matrixcore::ModMatrix;
use crate::modring::{is_prime, Modulus};
use crate::par::{map_items, Exec};
use crate::partitions::{gl_order, Partition};
use crate::sylvester::{kernel_dim_by_jordan_spectrum, kernel_dim_by_spectrum, kernel_dim_direct, lift_fiber};

/// Tolerance for floating comparisons of complex values.
pub const COMPLEX_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Evaluators,
    Counting,
    Gauss,
    Bounds,
    Sylvester,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Evaluators, Suite::Counting, Suite::Gauss, Suite::Bounds, Suite::Sylvester];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Evaluators => "evaluators",
            Suite::Counting => "counting",
            Suite::Gauss => "gauss",
            Suite::Bounds => "bounds",
            Suite::Sylvester => "sylvester",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

/// One line of a suite report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: usize,
    pub total: usize,
    /// Reported but never counted as a failure.
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl Check {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }

    fn from_outcomes(label: impl Into<String>, outcomes: Vec<Outcome>) -> Self {
        let total = outcomes.len();
        let passed = outcomes.iter().filter(|o| o.is_ok()).count();
        let first_failure = outcomes.into_iter().find_map(|o| o.err());
        Check { label: label.into(), passed, total, informational: false, first_failure }
    }

    fn info(mut self) -> Self {
        self.informational = true;
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match (self.ok(), self.informational) {
            (true, _) => "pass",
            (false, true) => "differs",
            (false, false) => "FAIL",
        };
        write!(f, "{}: {}/{} {}", self.label, self.passed, self.total, verdict)?;
        if let Some(msg) = &self.first_failure {
            write!(f, "\n    first failure: {msg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok() || c.informational)
    }

    pub fn check(&self, label_prefix: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.label.starts_with(label_prefix))
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} (seed {})", self.suite.name(), self.seed)?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        let good = self.checks.iter().filter(|c| c.ok() || c.informational).count();
        write!(f, "suite {}: {}/{} checks pass", self.suite.name(), good, self.checks.len())
    }
}

type Outcome = std::result::Result<(), String>;

fn expect(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn outcome(r: Result<Outcome>) -> Outcome {
    r.unwrap_or_else(|e| Err(e.to_string()))
}

fn rng_for(seed: u64, suite: Suite, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite.tag() << 32 | stream);
    rng
}

fn md(p: u64, k: u32) -> Modulus {
    Modulus::new(p, k).expect("small prime power")
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, r: Modulus) -> ModMatrix {
    ModMatrix::new(n, r, (0..n * n).map(|_| rng.gen_range(0..r.m())).collect()).expect("n² entries")
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize, r: Modulus) -> ModMatrix {
    loop {
        let m = random_matrix(rng, n, r);
        if m.is_invertible() {
            return m;
        }
    }
}

/// Every `n×n` matrix mod `r`, in odometer order.
pub fn all_matrices(n: usize, r: Modulus) -> Vec<ModMatrix> {
    fold_tuples(Exec::Sequential, r.m(), n * n, Vec::new, |v: &mut Vec<ModMatrix>, e| {
        v.push(ModMatrix::new(n, r, e.to_vec()).expect("n² entries"))
    })
    .into_iter()
    .flatten()
    .collect()
}

fn diagonal_matrices(n: usize, r: Modulus) -> Vec<ModMatrix> {
    fold_tuples(Exec::Sequential, r.m(), n, Vec::new, |v: &mut Vec<ModMatrix>, d| v.push(ModMatrix::diag(r, d)))
        .into_iter()
        .flatten()
        .collect()
}

fn pair_label(a: &ModMatrix, b: &ModMatrix) -> String {
    format!("A={a} B={b} mod {}", a.modulus())
}

/// Nilpotent matrix in Jordan form with block sizes `λ`.
pub fn nilpotent_of_type(lambda: &Partition, r: Modulus) -> ModMatrix {
    let n = lambda.size() as usize;
    let mut m = ModMatrix::zero(n, r);
    let mut start = 0;
    for &part in lambda.parts() {
        for i in 0..part as usize - 1 {
            m.set(start + i, start + i + 1, 1);
        }
        start += part as usize;
    }
    m
}

/// `|{X ∈ GL_n(F_p) : XM = MX}|` by enumeration.
pub fn centralizer_brute(m: &ModMatrix) -> u64 {
    let (n, r) = (m.n(), m.modulus());
    let kern = RingKernel::new(n, r);
    let me = m.entries();
    fold_tuples(
        Exec::Sequential,
        r.m(),
        n * n,
        || (0u64, vec![0u64; n * n], vec![0u64; n * n]),
        |(c, xm, mx), x| {
            if !kern.is_invertible(x) {
                return;
            }
            kern.mul(x, me, xm);
            kern.mul(me, x, mx);
            if xm == mx {
                *c += 1;
            }
        },
    )
    .into_iter()
    .map(|(c, _, _)| c)
    .sum()
}

/// Exact envelope verdicts grouped by envelope name, in first-seen order.
#[derive(Default)]
struct EnvelopeLedger {
    rows: Vec<(String, Vec<Outcome>)>,
}

impl EnvelopeLedger {
    fn record(&mut self, context: &str, env: &Envelope, holds: bool, observed: impl fmt::Display) {
        if !env.applicable {
            return;
        }
        let o = expect(holds, || format!("{context}: {observed} exceeds {env}"));
        match self.rows.iter_mut().find(|(n, _)| *n == env.name) {
            Some((_, v)) => v.push(o),
            None => self.rows.push((env.name.clone(), vec![o])),
        }
    }

    fn count(&mut self, context: &str, envs: &[Envelope], value: &BigUint) {
        for e in envs {
            self.record(context, e, e.dominates_count(value), value);
        }
    }

    fn magnitude(&mut self, context: &str, envs: &[Envelope], value: f64) {
        for e in envs {
            self.record(context, e, e.dominates_magnitude(value), format!("{value:.6}"));
        }
    }

    fn into_checks(self, prefix: &str) -> Vec<Check> {
        self.rows
            .into_iter()
            .map(|(name, v)| Check::from_outcomes(format!("{prefix} envelope {name}"), v))
            .collect()
    }
}

pub fn run_suite(suite: Suite, seed: u64, exec: Exec) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Evaluators => evaluators_suite(seed, exec)?,
        Suite::Counting => counting_suite(seed, exec)?,
        Suite::Gauss => gauss_suite(seed, exec)?,
        Suite::Bounds => bounds_suite(seed, exec)?,
        Suite::Sylvester => sylvester_suite(seed, exec)?,
    };
    Ok(SuiteReport { suite, seed, checks })
}

// ---------------------------------------------------------------- evaluators

pub struct EvaluatorInstances {
    pub exhaustive_n1: Vec<(ModMatrix, ModMatrix)>,
    pub diagonal_n2: Vec<(ModMatrix, ModMatrix)>,
    pub random_mod9: Vec<(ModMatrix, ModMatrix)>,
    pub random_mod27: Vec<(ModMatrix, ModMatrix)>,
    pub closed_form: Vec<(ModMatrix, ModMatrix)>,
    pub vanishing: Vec<(ModMatrix, ModMatrix)>,
    pub substitution: Vec<(ModMatrix, ModMatrix, ModMatrix, ModMatrix)>,
}

/// Closed-form instances: unit `det(AB)`, `AB` regular semisimple, and square
/// roots of `AB` with no two eigenvalues summing to zero.
fn closed_form_instances(rng: &mut ChaCha8Rng) -> Vec<(ModMatrix, ModMatrix)> {
    let plan: [(usize, u64, u32, usize); 8] =
        [(1, 3, 2, 8), (1, 3, 3, 8), (1, 5, 2, 8), (1, 5, 3, 8), (2, 3, 2, 8), (2, 3, 3, 8), (2, 5, 2, 8), (2, 5, 3, 2)];
    let mut out = Vec::new();
    for (n, p, k, want) in plan {
        let r = md(p, k);
        let mut got = 0;
        while got < want {
            let (a, b) = (random_unit(rng, n, r), random_unit(rng, n, r));
            let c = a.mul(&b).expect("same shape");
            if !regular_semisimple_test(&c).0 {
                continue;
            }
            match eval_salie_with(Exec::Sequential, &a, &b) {
                Err(Error::SingularLift) => continue,
                _ => {
                    out.push((a, b));
                    got += 1;
                }
            }
        }
    }
    out
}

fn vanishing_instances(rng: &mut ChaCha8Rng) -> Vec<(ModMatrix, ModMatrix)> {
    let plan: [(usize, u64, u32, usize); 4] = [(1, 3, 2, 15), (1, 5, 3, 10), (2, 3, 2, 20), (2, 3, 3, 10)];
    let mut out = Vec::new();
    for (n, p, k, want) in plan {
        let r = md(p, k);
        let l = k / 2;
        let mut got = 0;
        while got < want {
            // bias towards non-units so the Smith forms actually differ
            let mut a = random_matrix(rng, n, r);
            let mut b = random_matrix(rng, n, r);
            if rng.gen_bool(0.5) {
                a = a.scale(p);
            } else {
                b = b.scale(p);
            }
            if a.smith_form().truncate(l) != b.smith_form().truncate(l) {
                out.push((a, b));
                got += 1;
            }
        }
    }
    out
}

pub fn evaluator_instances(seed: u64) -> EvaluatorInstances {
    let mut exhaustive_n1 = Vec::new();
    for (p, k) in [(3, 2), (5, 2), (3, 3)] {
        let r = md(p, k);
        for a in 0..r.m() {
            for b in 0..r.m() {
                exhaustive_n1.push((ModMatrix::new(1, r, vec![a]).unwrap(), ModMatrix::new(1, r, vec![b]).unwrap()));
            }
        }
    }
    let r9 = md(3, 2);
    let diags = diagonal_matrices(2, r9);
    let diagonal_n2 = diags.iter().flat_map(|a| diags.iter().map(move |b| (a.clone(), b.clone()))).collect();
    let mut rng = rng_for(seed, Suite::Evaluators, 1);
    let random_mod9 = (0..200).map(|_| (random_matrix(&mut rng, 2, r9), random_matrix(&mut rng, 2, r9))).collect();
    let r27 = md(3, 3);
    let mut rng = rng_for(seed, Suite::Evaluators, 2);
    let random_mod27 = (0..20).map(|_| (random_matrix(&mut rng, 2, r27), random_matrix(&mut rng, 2, r27))).collect();
    let closed_form = closed_form_instances(&mut rng_for(seed, Suite::Evaluators, 3));
    let vanishing = vanishing_instances(&mut rng_for(seed, Suite::Evaluators, 4));
    let mut rng = rng_for(seed, Suite::Evaluators, 5);
    let substitution = (0..30)
        .map(|_| {
            (
                random_matrix(&mut rng, 2, r9),
                random_matrix(&mut rng, 2, r9),
                random_unit(&mut rng, 2, r9),
                random_unit(&mut rng, 2, r9),
            )
        })
        .collect();
    EvaluatorInstances { exhaustive_n1, diagonal_n2, random_mod9, random_mod27, closed_form, vanishing, substitution }
}

fn agreement(exec: Exec, pairs: &[(ModMatrix, ModMatrix)]) -> Vec<Outcome> {
    map_items(exec, pairs, |(a, b)| {
        outcome((|| {
            let brute = brute_sum(Exec::Sequential, a, b)?.canonicalize();
            let red = reduced_sum(Exec::Sequential, a, b)?.canonicalize();
            Ok(expect(brute == red, || format!("{}: brute {:?} vs reduced {:?}", pair_label(a, b), brute.to_complex(), red.to_complex())))
        })())
    })
}

/// Outcomes of the closed-form checks on one instance.
pub struct ClosedFormOutcome {
    pub even_exact: Option<Outcome>,
    pub odd_ratio: Option<Outcome>,
    pub roots: Outcome,
    pub magnitude: Outcome,
    pub magnitude_value: f64,
    pub label: String,
}

pub fn closed_form_outcomes(exec: Exec, pairs: &[(ModMatrix, ModMatrix)]) -> Vec<ClosedFormOutcome> {
    map_items(exec, pairs, |(a, b)| {
        let label = pair_label(a, b);
        let fail = |msg: String| ClosedFormOutcome {
            even_exact: Some(Err(msg.clone())),
            odd_ratio: None,
            roots: Err(msg.clone()),
            magnitude: Err(msg),
            magnitude_value: f64::NAN,
            label: label.clone(),
        };
        let (salie, brute) = match (eval_salie_with(Exec::Sequential, a, b), brute_sum(Exec::Sequential, a, b)) {
            (Ok(s), Ok(b)) => (s, b.canonicalize()),
            (Err(e), _) | (_, Err(e)) => return fail(format!("{label}: {e}")),
        };
        let det = salie.salie.clone().expect("closed-form details");
        let k = a.modulus().k();
        let (mut even_exact, mut odd_ratio) = (None, None);
        if k % 2 == 0 {
            even_exact = Some(expect(salie.sum == brute, || format!("{label}: closed form differs from brute force")));
        } else {
            let lit = Complex64::new(det.literal_re, det.literal_im);
            let bv = brute.to_complex();
            odd_ratio = Some(if lit.norm() < COMPLEX_TOLERANCE || bv.norm() < COMPLEX_TOLERANCE {
                expect(lit.norm() < COMPLEX_TOLERANCE && bv.norm() < COMPLEX_TOLERANCE, || {
                    format!("{label}: brute {bv:.6} vs closed form {lit:.6}")
                })
            } else {
                let ratio = bv / lit;
                expect(distance_to_pth_root(ratio, a.modulus().p()) < COMPLEX_TOLERANCE, || {
                    format!("{label}: ratio {ratio:.6} is not a {}-th root of unity", a.modulus().p())
                })
            });
        }
        let roots = expect(det.roots as u64 <= det.root_bound, || format!("{label}: {} square roots", det.roots));
        let mag = brute.magnitude();
        let env = salie.envelopes.iter().find(|c| c.envelope.name == "closed-form-magnitude").expect("envelope");
        let magnitude = expect(env.envelope.dominates_magnitude(mag), || format!("{label}: |K| = {mag:.6} exceeds {}", env.envelope));
        ClosedFormOutcome { even_exact, odd_ratio, roots, magnitude, magnitude_value: mag, label }
    })
}

pub fn vanishing_outcomes(exec: Exec, pairs: &[(ModMatrix, ModMatrix)]) -> Vec<Outcome> {
    map_items(exec, pairs, |(a, b)| {
        outcome((|| {
            let s = brute_sum(Exec::Sequential, a, b)?;
            Ok(expect(s.is_zero_value(), || format!("{}: value {:.6}", pair_label(a, b), s.to_complex())))
        })())
    })
}

fn evaluators_suite(seed: u64, exec: Exec) -> Result<Vec<Check>> {
    let inst = evaluator_instances(seed);
    let mut checks = vec![
        Check::from_outcomes("reduced = brute, n=1 all (a,b) mod 9, 25, 27", agreement(exec, &inst.exhaustive_n1)),
        Check::from_outcomes("reduced = brute, n=2 all diagonal pairs mod 9", agreement(exec, &inst.diagonal_n2)),
        Check::from_outcomes("reduced = brute, n=2 random pairs mod 9", agreement(exec, &inst.random_mod9)),
        Check::from_outcomes("reduced = brute, n=2 random pairs mod 27", agreement(exec, &inst.random_mod27)),
    ];
    let closed = closed_form_outcomes(exec, &inst.closed_form);
    checks.push(Check::from_outcomes(
        "closed form = brute, even k",
        closed.iter().filter_map(|c| c.even_exact.clone()).collect(),
    ));
    checks.push(Check::from_outcomes(
        "brute / closed form is a p-th root of unity, odd k",
        closed.iter().filter_map(|c| c.odd_ratio.clone()).collect(),
    ));
    checks.push(Check::from_outcomes("square roots of AB at most 2^n", closed.iter().map(|c| c.roots.clone()).collect()));
    checks.push(Check::from_outcomes(
        "|K| at most 2^n p^(kn²/2) in the closed-form regime",
        closed.iter().map(|c| c.magnitude.clone()).collect(),
    ));
    checks.push(Check::from_outcomes(
        "vanishing when Smith forms differ mod p^l",
        vanishing_outcomes(exec, &inst.vanishing),
    ));
    let subst = map_items(exec, &inst.substitution, |(a, b, u, v)| {
        outcome((|| {
            let lhs = brute_sum(Exec::Sequential, a, b)?;
            let a2 = v.mul(a)?.mul(u)?;
            let b2 = u.inverse()?.mul(b)?.mul(&v.inverse()?)?;
            let rhs = brute_sum(Exec::Sequential, &a2, &b2)?;
            Ok(expect(lhs.value_eq(&rhs), || format!("{} U={u} V={v}", pair_label(a, b))))
        })())
    });
    checks.push(Check::from_outcomes("K(A,B) = K(VAU, U⁻¹BV⁻¹)", subst));
    Ok(checks)
}

// ---------------------------------------------------------------- counting

pub struct CountingInstances {
    pub m2f3: Vec<ModMatrix>,
    pub m2f5: Vec<ModMatrix>,
    pub m3f3: Vec<ModMatrix>,
    /// `(A, B)` mod 9 with `B = XAX` for a random unit `X`, plus unrelated pairs.
    pub pairs_mod9: Vec<(ModMatrix, ModMatrix)>,
    pub pairs_mod3: Vec<(ModMatrix, ModMatrix)>,
}

pub fn counting_instances(seed: u64) -> CountingInstances {
    let (r3, r5, r9) = (md(3, 1), md(5, 1), md(3, 2));
    let mut rng = rng_for(seed, Suite::Counting, 1);
    let m3f3 = (0..200).map(|_| random_matrix(&mut rng, 3, r3)).collect();
    let mut rng = rng_for(seed, Suite::Counting, 2);
    let related = |rng: &mut ChaCha8Rng, r: Modulus, n: usize| {
        let a = random_matrix(rng, n, r);
        let x = random_unit(rng, n, r);
        let b = x.mul(&a).unwrap().mul(&x).unwrap();
        (a, b)
    };
    let mut pairs_mod9: Vec<_> = (0..40).map(|_| related(&mut rng, r9, 2)).collect();
    pairs_mod9.extend((0..10).map(|_| (random_matrix(&mut rng, 2, r9), random_matrix(&mut rng, 2, r9))));
    let j = ModMatrix::parse("0,1;0,0", r9).unwrap();
    pairs_mod9.push((j.clone(), j));
    let mut rng = rng_for(seed, Suite::Counting, 3);
    let mut pairs_mod3: Vec<_> = (0..20).map(|_| related(&mut rng, r3, 2)).collect();
    pairs_mod3.extend((0..20).map(|_| related(&mut rng, r3, 3)));
    pairs_mod3.extend((0..20).map(|_| (random_matrix(&mut rng, 2, r3), random_matrix(&mut rng, 2, r3))));
    CountingInstances { m2f3: all_matrices(2, r3), m2f5: all_matrices(2, r5), m3f3, pairs_mod9, pairs_mod3 }
}

pub fn closed_count_outcomes(exec: Exec, cs: &[ModMatrix]) -> Vec<Outcome> {
    map_items(exec, cs, |c| {
        outcome((|| {
            let closed = count_closed_mod_p(c)?.value;
            let brute = count_brute_with(Exec::Sequential, c, c)?;
            Ok(expect(closed == brute, || format!("C={c} mod {}: closed {closed} vs brute {brute}", c.modulus())))
        })())
    })
}

pub fn centralizer_outcomes() -> Vec<Outcome> {
    let mut out = Vec::new();
    for q in [2u64, 3] {
        for n in 1..=3 {
            for lambda in Partition::all(n) {
                let m = nilpotent_of_type(&lambda, md(q, 1));
                let brute = BigUint::from(centralizer_brute(&m));
                let formula = lambda.centralizer_order(&BigUint::from(q));
                out.push(expect(brute == formula, || format!("λ={lambda} q={q}: formula {formula} vs brute {brute}")));
            }
        }
    }
    out
}

pub fn nilpotent_mass_outcomes() -> Vec<Outcome> {
    let mut out = Vec::new();
    for q in [2u64, 3] {
        let qb = BigUint::from(q);
        for n in 1..=4u32 {
            let g = gl_order(n, &qb);
            let mass: BigUint = Partition::all(n).iter().map(|l| &g / l.centralizer_order(&qb)).sum();
            let want = qb.pow(n * n - n);
            out.push(expect(mass == want, || format!("n={n} q={q}: mass {mass} vs {want}")));
        }
    }
    out
}

fn counting_suite(seed: u64, exec: Exec) -> Result<Vec<Check>> {
    let inst = counting_instances(seed);
    let mut checks = vec![
        Check::from_outcomes("closed = brute, exhaustive M_2(F_3)", closed_count_outcomes(exec, &inst.m2f3)),
        Check::from_outcomes("closed = brute, exhaustive M_2(F_5)", closed_count_outcomes(exec, &inst.m2f5)),
        Check::from_outcomes("closed = brute, random M_3(F_3)", closed_count_outcomes(exec, &inst.m3f3)),
    ];
    let lifted = map_items(exec, &inst.pairs_mod9, |(a, b)| {
        outcome((|| {
            let brute = count_brute_with(Exec::Sequential, a, b)?;
            let lifted = crate::counting::solutions_lifted(Exec::Sequential, a, b)?.len();
            Ok(expect(brute == BigUint::from(lifted), || format!("{}: brute {brute} vs lifted {lifted}", pair_label(a, b))))
        })())
    });
    checks.push(Check::from_outcomes("lifted = brute, n=2 mod 9", lifted));
    let norm = map_items(exec, &inst.pairs_mod3, |(a, b)| {
        outcome((|| {
            let want = count_brute_with(Exec::Sequential, a, b)?;
            for nm in normalizations(Exec::Sequential, a, b)? {
                let Normalization::Equivalent { c, witness } = nm else { continue };
                let got = count_brute_with(Exec::Sequential, &c, &c)?;
                if got != want {
                    return Ok(Err(format!("{} X={witness}: N*(C,C) = {got} vs {want}", pair_label(a, b))));
                }
            }
            Ok(Ok(()))
        })())
    });
    checks.push(Check::from_outcomes("N*(A,B) = N*(XA,XA) for every solution X", norm));
    checks.push(Check::from_outcomes("centralizer order, |λ| ≤ 3, q ∈ {2,3}", centralizer_outcomes()));
    checks.push(Check::from_outcomes("nilpotent class mass q^(n²-n), n ≤ 4, q ∈ {2,3}", nilpotent_mass_outcomes()));
    Ok(checks)
}

// ---------------------------------------------------------------- gauss

pub struct GaussInstances {
    pub n1: Vec<(ModMatrix, ModMatrix)>,
    pub n2: Vec<(ModMatrix, ModMatrix)>,
    pub n3: Vec<(ModMatrix, ModMatrix)>,
    pub dichotomy: Vec<(ModMatrix, ModMatrix)>,
}

pub fn gauss_instances(seed: u64) -> GaussInstances {
    let mut n1 = Vec::new();
    for p in [3u64, 5, 7] {
        let r = md(p, 1);
        for s in 0..p {
            for t in 0..p {
                n1.push((ModMatrix::new(1, r, vec![s]).unwrap(), ModMatrix::new(1, r, vec![t]).unwrap()));
            }
        }
    }
    let mut rng = rng_for(seed, Suite::Gauss, 1);
    let mut n2 = Vec::new();
    for p in [3u64, 5] {
        let r = md(p, 1);
        n2.extend((0..250).map(|_| (random_matrix(&mut rng, 2, r), random_matrix(&mut rng, 2, r))));
    }
    let r3 = md(3, 1);
    let n3 = (0..50).map(|_| (random_matrix(&mut rng, 3, r3), random_matrix(&mut rng, 3, r3))).collect();
    let all = all_matrices(2, r3);
    let dichotomy = all.iter().flat_map(|s| all.iter().map(move |t| (s.clone(), t.clone()))).collect();
    GaussInstances { n1, n2, n3, dichotomy }
}

pub struct GaussOutcome {
    pub agree: Outcome,
    pub literal: Outcome,
    pub bound: Outcome,
    pub magnitude: f64,
}

pub fn gauss_outcomes(exec: Exec, pairs: &[(ModMatrix, ModMatrix)]) -> Vec<GaussOutcome> {
    map_items(exec, pairs, |(s, t)| {
        let label = format!("S={s} T={t} mod {}", s.modulus());
        let p = s.modulus().p();
        let (brute, closed) = match (gauss_brute_with(Exec::Sequential, s, t), gauss_closed(s, t)) {
            (Ok(b), Ok(c)) => (b, c),
            (Err(e), _) | (_, Err(e)) => {
                let msg = format!("{label}: {e}");
                return GaussOutcome { agree: Err(msg.clone()), literal: Err(msg.clone()), bound: Err(msg), magnitude: f64::NAN };
            }
        };
        let bv = brute.to_complex();
        let cv = closed.to_complex(p).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let close = |x: Complex64| {
            if brute.is_zero_value() {
                x.norm() < COMPLEX_TOLERANCE
            } else {
                (x - bv).norm() <= COMPLEX_TOLERANCE * bv.norm()
            }
        };
        let exact_zero = brute.is_zero_value() == closed.is_zero();
        let agree = expect(close(cv) && exact_zero, || format!("{label}: closed {cv:.6} vs brute {bv:.6}"));
        let lit = closed.literal_complex(p);
        let literal = expect(close(lit), || format!("{label}: literal {lit:.6} vs brute {bv:.6}"));
        let mag = brute.magnitude();
        let env = gauss_bound(t);
        let bound = expect(env.dominates_magnitude(mag), || format!("{label}: |S| = {mag:.6} exceeds {env}"));
        GaussOutcome { agree, literal, bound, magnitude: mag }
    })
}

pub fn dichotomy_outcomes(exec: Exec, pairs: &[(ModMatrix, ModMatrix)]) -> Vec<Outcome> {
    map_items(exec, pairs, |(s, t)| {
        outcome((|| {
            let zero = gauss_brute_with(Exec::Sequential, s, t)?.is_zero_value();
            let solvable = gauss_closed_details(s, t)?.solvable;
            Ok(expect(zero != solvable, || format!("S={s} T={t}: zero={zero} solvable={solvable}")))
        })())
    })
}

fn gauss_suite(seed: u64, exec: Exec) -> Result<Vec<Check>> {
    let inst = gauss_instances(seed);
    let mut checks = Vec::new();
    let mut literal = Vec::new();
    let mut bound = Vec::new();
    for (label, pairs) in [
        ("closed = brute, n=1 all (S,T), p ∈ {3,5,7}", &inst.n1),
        ("closed = brute, n=2 random, p ∈ {3,5}", &inst.n2),
        ("closed = brute, n=3 random, p=3", &inst.n3),
    ] {
        let outs = gauss_outcomes(exec, pairs);
        checks.push(Check::from_outcomes(label, outs.iter().map(|o| o.agree.clone()).collect()));
        literal.extend(outs.iter().map(|o| o.literal.clone()));
        bound.extend(outs.iter().map(|o| o.bound.clone()));
    }
    checks.push(Check::from_outcomes(
        "zero iff TY+YT=S has no solution, exhaustive n=2 p=3",
        dichotomy_outcomes(exec, &inst.dichotomy),
    ));
    checks.push(Check::from_outcomes("|S| at most p^((n-r)²+r_∞²/2)", bound));
    checks.push(Check::from_outcomes("closed form with p^(R/2) in place of g_p^R", literal).info());
    Ok(checks)
}

// ---------------------------------------------------------------- bounds

fn bounds_suite(seed: u64, exec: Exec) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // Kloosterman magnitudes: every instance of the evaluator suite plus k = 1 grids.
    let ev = evaluator_instances(seed);
    let mut kpairs: Vec<(ModMatrix, ModMatrix)> = Vec::new();
    for p in [3u64, 5, 7] {
        let r = md(p, 1);
        for a in 0..p {
            for b in 0..p {
                kpairs.push((ModMatrix::new(1, r, vec![a]).unwrap(), ModMatrix::new(1, r, vec![b]).unwrap()));
            }
        }
    }
    let mut rng = rng_for(seed, Suite::Bounds, 1);
    for p in [3u64, 5] {
        let r = md(p, 1);
        kpairs.extend((0..30).map(|_| (random_matrix(&mut rng, 2, r), random_matrix(&mut rng, 2, r))));
    }
    for set in [&ev.exhaustive_n1, &ev.diagonal_n2, &ev.random_mod9, &ev.random_mod27, &ev.closed_form, &ev.vanishing] {
        kpairs.extend(set.iter().cloned());
    }
    let kres = map_items(exec, &kpairs, |(a, b)| -> Result<Option<(Vec<Envelope>, f64)>> {
        let env = match main_bounds(a, b) {
            Err(Error::BothZero) => return Ok(None),
            other => other?,
        };
        Ok(Some((env, brute_sum(Exec::Sequential, a, b)?.magnitude())))
    });
    let mut ledger = EnvelopeLedger::default();
    for ((a, b), res) in kpairs.iter().zip(kres) {
        if let Some((env, mag)) = res? {
            ledger.magnitude(&pair_label(a, b), &env, mag);
        }
    }
    checks.extend(ledger.into_checks("|K|"));

    // N* mod p: closed counts over the counting suite's matrices.
    let ci = counting_instances(seed);
    let mut cs: Vec<ModMatrix> = ci.m2f3.clone();
    cs.extend(ci.m2f5.iter().cloned());
    cs.extend(ci.m3f3.iter().cloned());
    let cres = map_items(exec, &cs, |c| -> Result<(BigUint, Vec<Envelope>)> {
        let value = count_brute_with(Exec::Sequential, c, c)?;
        let mut env = bound_envelopes(c, c);
        env.extend(square_root_envelopes(c)?);
        Ok((value, env))
    });
    let mut ledger = EnvelopeLedger::default();
    for (c, res) in cs.iter().zip(cres) {
        let (value, env) = res?;
        ledger.count(&format!("C={c} mod {}", c.modulus()), &env, &value);
    }

    // N* for pairs mod p and mod p²; rank mismatch must force zero.
    let mut pairs = ci.pairs_mod3.clone();
    pairs.extend(ci.pairs_mod9.iter().cloned());
    let pres = map_items(exec, &pairs, |(a, b)| count_brute_with(Exec::Sequential, a, b));
    let mut mismatch = Vec::new();
    for ((a, b), res) in pairs.iter().zip(pres) {
        let value = res?;
        let label = pair_label(a, b);
        ledger.count(&label, &bound_envelopes(a, b), &value);
        let (ra, rb) = ((a.rank_mod_p(), a.stable_rank()), (b.rank_mod_p(), b.stable_rank()));
        if ra != rb {
            mismatch.push(expect(value == BigUint::from(0u32), || format!("{label}: N* = {value}")));
        }
    }
    checks.extend(ledger.into_checks("N*"));
    checks.push(Check::from_outcomes("N* = 0 when rank or stable rank differ", mismatch));

    // Lifting fibers mod 9.
    let fres = map_items(exec, &ci.pairs_mod9, |(a, b)| -> Result<Vec<Outcome>> {
        let sols = solutions_brute(Exec::Sequential, &a.mod_p(), &b.mod_p())?;
        let mut out = Vec::new();
        for x0 in sols {
            let lifts = lift_fiber(a, b, &x0)?.len();
            let env = fiber_envelope(&a.mod_p().mul(&x0)?);
            let label = format!("{} X0={x0}", pair_label(a, b));
            out.push(expect(env.dominates_count(&BigUint::from(lifts)), || format!("{label}: {lifts} lifts exceed {env}")));
        }
        Ok(out)
    });
    let mut fibers = Vec::new();
    for r in fres {
        fibers.extend(r?);
    }
    checks.push(Check::from_outcomes("lifts per fiber at most p^((n-r)²+r_∞²/2)", fibers));

    // Gauss sums over the gauss suite's instances.
    let gi = gauss_instances(seed);
    let mut gp = gi.n1.clone();
    gp.extend(gi.n2.iter().cloned());
    gp.extend(gi.n3.iter().cloned());
    let gout = gauss_outcomes(exec, &gp);
    checks.push(Check::from_outcomes("|S| envelope gauss-rank", gout.into_iter().map(|o| o.bound).collect()));
    Ok(checks)
}

// ---------------------------------------------------------------- sylvester

pub fn sylvester_instances(seed: u64) -> (Vec<ModMatrix>, Vec<ModMatrix>) {
    let mut rng = rng_for(seed, Suite::Sylvester, 1);
    let r5 = md(5, 1);
    let random = (0..1000).map(|_| random_matrix(&mut rng, 3, r5)).collect();
    (all_matrices(2, md(3, 1)), random)
}

pub fn kernel_outcomes(exec: Exec, cs: &[ModMatrix], refined: bool) -> Vec<Outcome> {
    map_items(exec, cs, |c| {
        outcome((|| {
            let direct = kernel_dim_direct(c)?;
            let formula = if refined { kernel_dim_by_jordan_spectrum(c)? } else { kernel_dim_by_spectrum(c)? };
            Ok(expect(direct == formula, || format!("C={c} mod {}: formula {formula} vs direct {direct}", c.modulus())))
        })())
    })
}

fn sylvester_suite(seed: u64, exec: Exec) -> Result<Vec<Check>> {
    let (m2f3, m3f5) = sylvester_instances(seed);
    Ok(vec![
        Check::from_outcomes("eigenvalue-pair kernel formula = direct, exhaustive M_2(F_3)", kernel_outcomes(exec, &m2f3, false)),
        Check::from_outcomes("eigenvalue-pair kernel formula = direct, random M_3(F_5)", kernel_outcomes(exec, &m3f5, false)),
        Check::from_outcomes("Jordan-refined kernel formula = direct, exhaustive M_2(F_3)", kernel_outcomes(exec, &m2f3, true)),
        Check::from_outcomes("Jordan-refined kernel formula = direct, random M_3(F_5)", kernel_outcomes(exec, &m3f5, true)),
    ])
}

// ---------------------------------------------------------------- tables

/// Instance grid such as `n=2;p=3,5;k=1..3;samples=20`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub n: Vec<usize>,
    pub p: Vec<u64>,
    pub k: Vec<u32>,
    /// `None` enumerates every pair.
    pub samples: Option<usize>,
}

fn parse_values(key: &str, vals: &[&str]) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for v in vals {
        let bad = || Error::Parse(format!("grid value {v:?} for {key}"));
        if let Some((lo, hi)) = v.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
            out.extend(lo..=hi);
        } else {
            out.push(v.trim().parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

impl Grid {
    /// Keys are separated by `;`; a comma starts a new key when the next
    /// token contains `=`, otherwise it separates values. Empty text is the empty grid.
    pub fn parse(text: &str) -> Result<Grid> {
        let mut grid = Grid { n: Vec::new(), p: Vec::new(), k: Vec::new(), samples: None };
        if text.trim().is_empty() {
            return Ok(grid);
        }
        let mut entries: Vec<(String, Vec<String>)> = Vec::new();
        for tok in text.split([';', ',']) {
            let tok = tok.trim();
            if tok.is_empty() {
                continue;
            }
            match tok.split_once('=') {
                Some((k, v)) => entries.push((k.trim().to_string(), vec![v.trim().to_string()])),
                None => match entries.last_mut() {
                    Some((_, vals)) => vals.push(tok.to_string()),
                    None => return Err(Error::Parse(format!("grid token {tok:?} has no key"))),
                },
            }
        }
        for (key, vals) in entries {
            let vals: Vec<&str> = vals.iter().map(String::as_str).collect();
            match key.as_str() {
                "n" => grid.n = parse_values(&key, &vals)?.into_iter().map(|x| x as usize).collect(),
                "p" => grid.p = parse_values(&key, &vals)?.into_iter().filter(|&p| is_prime(p)).collect(),
                "k" => grid.k = parse_values(&key, &vals)?.into_iter().map(|x| x as u32).collect(),
                "samples" => {
                    grid.samples = match vals.as_slice() {
                        ["all"] => None,
                        [v] => Some(v.parse().map_err(|_| Error::Parse(format!("samples {v:?}")))?),
                        _ => return Err(Error::Parse("samples takes one value".into())),
                    }
                }
                other => return Err(Error::Parse(format!("unknown grid key {other:?}"))),
            }
        }
        if grid.n.contains(&0) || grid.k.contains(&0) {
            return Err(Error::Parse("n and k must be positive".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub p: u64,
    pub k: u32,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    pub method: String,
    pub re: String,
    pub im: String,
    pub abs: String,
    pub envelope_name: String,
    pub envelope: String,
    pub ratio: String,
    pub status: String,
}

/// Fixed 15 significant digits; negative zero prints as zero.
pub fn sig15(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.14e}", 0.0);
    }
    format!("{x:.14e}")
}

fn table_row(a: &ModMatrix, b: &ModMatrix) -> TableRow {
    let r = a.modulus();
    let mut row = TableRow {
        n: a.n(),
        p: r.p(),
        k: r.k(),
        a: a.to_string(),
        b: b.to_string(),
        method: "brute".into(),
        re: String::new(),
        im: String::new(),
        abs: String::new(),
        envelope_name: String::new(),
        envelope: String::new(),
        ratio: String::new(),
        status: "ok".into(),
    };
    let sum = match brute_sum(Exec::Sequential, a, b) {
        Ok(s) => s.canonicalize(),
        Err(Error::TooLarge { .. }) => {
            row.status = "skipped".into();
            return row;
        }
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    let z = sum.to_complex();
    let mag = sum.magnitude();
    row.re = sig15(z.re);
    row.im = sig15(z.im);
    row.abs = sig15(mag);
    match main_bounds(a, b) {
        Ok(env) => {
            let best = env
                .iter()
                .filter(|e| e.applicable)
                .min_by(|x, y| x.value_f64().total_cmp(&y.value_f64()))
                .expect("the generic envelope always applies");
            row.envelope_name = best.name.clone();
            row.envelope = best.to_string();
            row.ratio = sig15(mag / best.value_f64());
            if !best.dominates_magnitude(mag) {
                row.status = "exceeds".into();
            }
        }
        Err(_) => row.status = "both-zero".into(),
    }
    row
}

/// Rows in grid order: `n`, then `p`, then `k`, then pair index.
pub fn table_rows(grid: &Grid, seed: u64, exec: Exec) -> Result<Vec<TableRow>> {
    let mut pairs = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &n in &grid.n {
        for &p in &grid.p {
            for &k in &grid.k {
                let r = Modulus::new(p, k)?;
                match grid.samples {
                    Some(s) => pairs.extend((0..s).map(|_| (random_matrix(&mut rng, n, r), random_matrix(&mut rng, n, r)))),
                    None => {
                        crate::enumerate::check_size(r.m(), 2 * n * n, 1_000_000)?;
                        let all = all_matrices(n, r);
                        pairs.extend(all.iter().flat_map(|a| all.iter().map(move |b| (a.clone(), b.clone()))));
                    }
                }
            }
        }
    }
    Ok(map_items(exec, &pairs, |(a, b)| table_row(a, b)))
}
