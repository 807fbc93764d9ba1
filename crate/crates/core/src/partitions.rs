//! Integer partitions, their duals, and centralizer orders of nilpotent
//! matrices over `F_q`.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

/// A weakly decreasing sequence of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition {
    parts: Vec<u32>,
    /// `(part size, multiplicity)` with sizes decreasing.
    mults: Vec<(u32, u32)>,
}

impl From<Vec<u32>> for Partition {
    fn from(parts: Vec<u32>) -> Self {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&x| x > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let mut mults: Vec<(u32, u32)> = Vec::new();
        for &x in &parts {
            match mults.last_mut() {
                Some((s, r)) if *s == x => *r += 1,
                _ => mults.push((x, 1)),
            }
        }
        Partition { parts, mults }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// `(size j, r_j)` pairs, sizes decreasing.
    pub fn multiplicities(&self) -> &[(u32, u32)] {
        &self.mults
    }

    /// `r_j`, the number of parts equal to `j`.
    pub fn multiplicity(&self, j: u32) -> u32 {
        self.mults.iter().find(|(s, _)| *s == j).map_or(0, |(_, r)| *r)
    }

    pub fn size(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Transpose of the Young diagram: `d_i = #{parts ≥ i}`.
    pub fn dual(&self) -> Partition {
        let largest = self.parts.first().copied().unwrap_or(0);
        Partition::new((1..=largest).map(|i| self.parts.iter().filter(|&&x| x >= i).count() as u32).collect())
    }

    /// The partition whose parts are those of `self` and `other` together.
    pub fn join(&self, other: &Partition) -> Partition {
        Partition::new(self.parts.iter().chain(&other.parts).copied().collect())
    }

    /// `μ` with `μ + μ = self`, when every multiplicity is even.
    pub fn halve(&self) -> Option<Partition> {
        if self.mults.iter().any(|(_, r)| r % 2 == 1) {
            return None;
        }
        Some(Partition::new(self.mults.iter().flat_map(|&(s, r)| std::iter::repeat_n(s, (r / 2) as usize)).collect()))
    }

    /// All `(μ, ν)` with `μ + ν = self`, one per choice of multiplicities for `μ`.
    pub fn decompositions(&self) -> Vec<(Partition, Partition)> {
        let mut out = Vec::new();
        let mut choice = vec![0u32; self.mults.len()];
        loop {
            let mut mu = Vec::new();
            let mut nu = Vec::new();
            for (&(s, r), &c) in self.mults.iter().zip(&choice) {
                mu.extend(std::iter::repeat_n(s, c as usize));
                nu.extend(std::iter::repeat_n(s, (r - c) as usize));
            }
            out.push((Partition::new(mu), Partition::new(nu)));
            let mut i = 0;
            loop {
                if i == choice.len() {
                    return out;
                }
                if choice[i] < self.mults[i].1 {
                    choice[i] += 1;
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    pub fn sum_dual_squares(&self) -> u32 {
        self.dual().parts.iter().map(|&d| d * d).sum()
    }

    /// Order of the centralizer in `GL_{|λ|}(F_q)` of a nilpotent with Jordan type `λ`:
    /// `∏_j |GL_{r_j}(F_q)| · q^{Σ d_j² − Σ r_j²}`.
    pub fn centralizer_order(&self, q: &BigUint) -> BigUint {
        let mut acc = BigUint::one();
        let mut rsq = 0u32;
        for &(_, r) in &self.mults {
            acc *= gl_order(r, q);
            rsq += r * r;
        }
        acc * q.pow(self.sum_dual_squares() - rsq)
    }

    /// `∏_j φ_{r_j}(1/q)` with `φ_r(T) = ∏_{t ≤ r} (1 − T^t)`.
    pub fn phi(&self, q: &BigUint) -> BigRational {
        let qi = num_bigint::BigInt::from(q.clone());
        let mut acc = BigRational::one();
        for &(_, r) in &self.mults {
            for t in 1..=r {
                let den = qi.pow(t);
                acc *= BigRational::new(den.clone() - 1, den);
            }
        }
        acc
    }

    /// Every partition of `n`, in reverse lexicographic order.
    pub fn all(n: u32) -> Vec<Partition> {
        fn rec(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition::new(cur.clone()));
                return;
            }
            for x in (1..=rest.min(max)).rev() {
                cur.push(x);
                rec(rest - x, x, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }
}

/// `|GL_r(F_q)| = ∏_{i<r} (q^r − q^i)`.
pub fn gl_order(r: u32, q: &BigUint) -> BigUint {
    let qr = q.pow(r);
    (0..r).fold(BigUint::one(), |acc, i| acc * (&qr - q.pow(i)))
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}
