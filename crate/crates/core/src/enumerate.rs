//! Odometer enumeration of tuples and matrices over `Z/mZ`, plus the raw
//! slice kernels (inverse, products) used inside the hot loops.

use crate::error::{Error, Result};
use crate::modring::Modulus;
use crate::par::{map_indexed, Exec};

/// Default cap on the number of enumerated candidates.
pub const ENUMERATION_LIMIT: u128 = 1_000_000_000;

/// Target number of slices handed to the scheduler.
const MIN_SLICES: u128 = 64;

/// `base^len`, or `TooLarge` if it exceeds `limit`.
pub fn check_size(base: u64, len: usize, limit: u128) -> Result<u128> {
    let mut total: u128 = 1;
    for _ in 0..len {
        total = total.saturating_mul(base as u128);
    }
    if total > limit {
        return Err(Error::TooLarge { candidates: total, limit });
    }
    Ok(total)
}

/// Visit every tuple in `(Z/base)^len` in row-major odometer order (last
/// coordinate fastest). Tuples are split into slices by a fixed-length prefix;
/// each slice folds into its own accumulator and the accumulators come back in
/// slice order.
pub fn fold_tuples<T, I, V>(exec: Exec, base: u64, len: usize, init: I, visit: V) -> Vec<T>
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    V: Fn(&mut T, &[u64]) + Sync + Send,
{
    let mut prefix = 0;
    let mut slices: u128 = 1;
    while prefix < len && slices < MIN_SLICES {
        prefix += 1;
        slices *= base as u128;
    }
    map_indexed(exec, slices as usize, |slice| {
        let mut acc = init();
        let mut digits = vec![0u64; len];
        let mut rest = slice as u64;
        for d in digits[..prefix].iter_mut().rev() {
            *d = rest % base;
            rest /= base;
        }
        loop {
            visit(&mut acc, &digits);
            let mut i = len;
            loop {
                if i == prefix {
                    return acc;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < base {
                    break;
                }
                digits[i] = 0;
            }
        }
    })
}

/// Arithmetic kernels on raw row-major `n×n` slices over `Z/p^kZ`.
#[derive(Debug, Clone)]
pub struct RingKernel {
    pub n: usize,
    pub modulus: Modulus,
    m: u64,
    inv: Vec<u64>,
}

impl RingKernel {
    pub fn new(n: usize, modulus: Modulus) -> Self {
        let m = modulus.m();
        let inv = (0..m).map(|a| modulus.inv(a).unwrap_or(0)).collect();
        RingKernel { n, modulus, m, inv }
    }

    #[inline]
    pub fn m(&self) -> u64 {
        self.m
    }

    #[inline]
    pub fn inv_scalar(&self, a: u64) -> u64 {
        self.inv[a as usize]
    }

    /// `out = x·y`.
    #[inline]
    pub fn mul(&self, x: &[u64], y: &[u64], out: &mut [u64]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0u64;
                for t in 0..n {
                    s += x[i * n + t] * y[t * n + j];
                }
                out[i * n + j] = s % self.m;
            }
        }
    }

    /// `Tr(x·y)` without forming the product.
    #[inline]
    pub fn trace_mul(&self, x: &[u64], y: &[u64]) -> u64 {
        let n = self.n;
        let mut s = 0u64;
        for i in 0..n {
            for t in 0..n {
                s += x[i * n + t] * y[t * n + i];
            }
        }
        s % self.m
    }

    /// Write `x^{-1}` into `out`; returns false when `x` is singular mod `p`.
    pub fn inverse(&self, x: &[u64], out: &mut [u64]) -> bool {
        let m = self.m;
        match self.n {
            1 => {
                let d = self.inv[x[0] as usize];
                out[0] = d;
                d != 0
            }
            2 => {
                let det = (x[0] * x[3] % m + m - x[1] * x[2] % m) % m;
                let di = self.inv[det as usize];
                if di == 0 {
                    return false;
                }
                out[0] = x[3] * di % m;
                out[1] = (m - x[1]) * di % m;
                out[2] = (m - x[2]) * di % m;
                out[3] = x[0] * di % m;
                true
            }
            3 => {
                let c = |a: usize, b: usize, c: usize, d: usize| (x[a] * x[b] % m + m - x[c] * x[d] % m) % m;
                let a00 = c(4, 8, 5, 7);
                let a01 = c(2, 7, 1, 8);
                let a02 = c(1, 5, 2, 4);
                let det = (x[0] * a00 + x[3] * a01 + x[6] * a02) % m;
                let di = self.inv[det as usize];
                if di == 0 {
                    return false;
                }
                let adj = [
                    a00,
                    a01,
                    a02,
                    c(5, 6, 3, 8),
                    c(0, 8, 2, 6),
                    c(2, 3, 0, 5),
                    c(3, 7, 4, 6),
                    c(1, 6, 0, 7),
                    c(0, 4, 1, 3),
                ];
                for (o, a) in out.iter_mut().zip(adj) {
                    *o = a * di % m;
                }
                true
            }
            _ => self.inverse_gauss_jordan(x, out),
        }
    }

    fn inverse_gauss_jordan(&self, x: &[u64], out: &mut [u64]) -> bool {
        let (n, m, r) = (self.n, self.m, self.modulus);
        let w = 2 * n;
        let mut aug = vec![0u64; n * w];
        for i in 0..n {
            aug[i * w..i * w + n].copy_from_slice(&x[i * n..(i + 1) * n]);
            aug[i * w + n + i] = 1;
        }
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| r.is_unit(aug[i * w + c])) else {
                return false;
            };
            if pr != c {
                for j in 0..w {
                    aug.swap(pr * w + j, c * w + j);
                }
            }
            let inv = self.inv[aug[c * w + c] as usize];
            for j in 0..w {
                aug[c * w + j] = aug[c * w + j] * inv % m;
            }
            for i in 0..n {
                let f = aug[i * w + c];
                if i == c || f == 0 {
                    continue;
                }
                for j in 0..w {
                    aug[i * w + j] = (aug[i * w + j] + m - f * aug[c * w + j] % m) % m;
                }
            }
        }
        for i in 0..n {
            out[i * n..(i + 1) * n].copy_from_slice(&aug[i * w + n..(i + 1) * w]);
        }
        true
    }

    /// Determinant is a unit, i.e. nonzero mod `p`.
    pub fn is_invertible(&self, x: &[u64]) -> bool {
        let (m, p) = (self.m, self.modulus.p());
        match self.n {
            1 => !x[0].is_multiple_of(p),
            2 => !(x[0] * x[3] % m + m - x[1] * x[2] % m).is_multiple_of(p),
            3 => {
                let c = |a: usize, b: usize, c: usize, d: usize| (x[a] * x[b] % m + m - x[c] * x[d] % m) % m;
                !(x[0] * c(4, 8, 5, 7) + x[3] * c(2, 7, 1, 8) + x[6] * c(1, 5, 2, 4)).is_multiple_of(p)
            }
            _ => {
                let mut scratch = vec![0u64; self.n * self.n];
                self.inverse_gauss_jordan(x, &mut scratch)
            }
        }
    }
}
