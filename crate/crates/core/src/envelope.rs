//! Upper-bound envelopes of the form `c · p^{a/b}` and exact domination checks.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// Relative slack allowed when comparing a floating magnitude with an envelope.
pub const MAGNITUDE_SLACK: f64 = 1e-9;

/// `coef_num/coef_den · p^{exp_num/exp_den}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub name: String,
    pub p: u64,
    pub exp_num: u64,
    pub exp_den: u64,
    pub coef_num: u64,
    pub coef_den: u64,
    pub applicable: bool,
}

impl Envelope {
    pub fn new(name: impl Into<String>, p: u64, exp_num: u64, exp_den: u64) -> Self {
        Self::with_coefficient(name, p, exp_num, exp_den, 1, 1)
    }

    pub fn with_coefficient(
        name: impl Into<String>,
        p: u64,
        exp_num: u64,
        exp_den: u64,
        coef_num: u64,
        coef_den: u64,
    ) -> Self {
        let g = exp_num.gcd(&exp_den);
        let h = coef_num.gcd(&coef_den);
        Envelope {
            name: name.into(),
            p,
            exp_num: exp_num / g,
            exp_den: exp_den / g,
            coef_num: coef_num / h,
            coef_den: coef_den / h,
            applicable: true,
        }
    }

    pub fn applicable(mut self, yes: bool) -> Self {
        self.applicable = yes;
        self
    }

    pub fn exponent(&self) -> f64 {
        self.exp_num as f64 / self.exp_den as f64
    }

    pub fn value_f64(&self) -> f64 {
        self.coef_num as f64 / self.coef_den as f64 * (self.p as f64).powf(self.exponent())
    }

    /// `count ≤ c·p^{a/b}` decided exactly as `(count·c_den)^b ≤ c_num^b · p^a`.
    pub fn dominates_count(&self, count: &BigUint) -> bool {
        let b = self.exp_den as u32;
        let lhs = (count * self.coef_den).pow(b);
        let rhs = BigUint::from(self.coef_num).pow(b) * BigUint::from(self.p).pow(self.exp_num as u32);
        lhs <= rhs
    }

    /// Floating comparison for magnitudes of cyclotomic integers.
    pub fn dominates_magnitude(&self, magnitude: f64) -> bool {
        magnitude <= self.value_f64() * (1.0 + MAGNITUDE_SLACK)
    }
}

impl fmt::Display for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coef_num != 1 || self.coef_den != 1 {
            if self.coef_den == 1 {
                write!(f, "{}*", self.coef_num)?;
            } else {
                write!(f, "({}/{})*", self.coef_num, self.coef_den)?;
            }
        }
        if self.exp_den == 1 {
            write!(f, "{}^{}", self.p, self.exp_num)
        } else {
            write!(f, "{}^({}/{})", self.p, self.exp_num, self.exp_den)
        }
    }
}

/// One envelope checked against one value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub envelope: Envelope,
    pub holds: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_exponents_compare_exactly() {
        let e = Envelope::new("sqrt", 3, 3, 2);
        // 3^{3/2} ≈ 5.196
        assert!(e.dominates_count(&BigUint::from(5u32)));
        assert!(!e.dominates_count(&BigUint::from(6u32)));
        assert!(e.dominates_magnitude(5.19));
        assert!(!e.dominates_magnitude(5.638));
        let c = Envelope::with_coefficient("reg", 3, 2, 1, 10, 8);
        assert!(c.dominates_count(&BigUint::from(11u32)));
        assert!(!c.dominates_count(&BigUint::from(12u32)));
        assert_eq!(c.to_string(), "(5/4)*3^2");
        assert_eq!(Envelope::new("g", 5, 4, 2).to_string(), "5^2");
    }
}
