//! Library results against naive recomputation that shares no code with it.

use std::f64::consts::TAU;

use num_bigint::BigUint;
use num_complex::Complex64;

use kloo_core::charsum::gauss_constant;
use kloo_core::counting::{count_brute, count_closed_mod_p, count_lifted};
use kloo_core::gaussmat::{gauss_brute, gauss_closed};
use kloo_core::kloosterman::{eval_brute, eval_reduced, eval_salie};
use kloo_core::matrixcore::ModMatrix;
use kloo_core::modring::{residue_symbol, FpPoly, Modulus};
use kloo_core::partitions::Partition;
use kloo_core::sylvester::{kernel_dim_by_jordan_spectrum, kernel_dim_direct};

/// Row-major square matrices over Z/m, everything recomputed from scratch.
mod naive {
    pub type M = Vec<i64>;

    pub fn mul(a: &M, b: &M, n: usize, m: i64) -> M {
        let mut c = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                c[i * n + j] = (0..n).map(|t| a[i * n + t] * b[t * n + j]).sum::<i64>().rem_euclid(m);
            }
        }
        c
    }

    pub fn trace(a: &M, n: usize) -> i64 {
        (0..n).map(|i| a[i * n + i]).sum()
    }

    pub fn all(n: usize, m: i64) -> Vec<M> {
        let len = n * n;
        let total = (m as usize).pow(len as u32);
        (0..total)
            .map(|mut idx| {
                (0..len)
                    .map(|_| {
                        let e = (idx % m as usize) as i64;
                        idx /= m as usize;
                        e
                    })
                    .collect()
            })
            .collect()
    }

    fn identity(n: usize) -> M {
        (0..n * n).map(|i| i64::from(i % (n + 1) == 0)).collect()
    }

    /// Inverse found by search; fine for the tiny groups used here.
    pub fn group(n: usize, m: i64) -> Vec<(M, M)> {
        let mats = all(n, m);
        let id = identity(n);
        let mut out = Vec::new();
        for x in &mats {
            if let Some(y) = mats.iter().find(|y| mul(x, y, n, m) == id) {
                out.push((x.clone(), y.clone()));
            }
        }
        out
    }
}

fn e(num: i64, m: i64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * num as f64 / m as f64)
}

fn kloosterman_naive(a: &[i64], b: &[i64], n: usize, m: i64) -> Complex64 {
    naive::group(n, m)
        .iter()
        .map(|(x, xi)| {
            let t = naive::trace(&naive::mul(&a.to_vec(), x, n, m), n) + naive::trace(&naive::mul(xi, &b.to_vec(), n, m), n);
            e(t, m)
        })
        .sum()
}

fn count_naive(a: &[i64], b: &[i64], n: usize, m: i64) -> usize {
    naive::group(n, m)
        .iter()
        .filter(|(x, _)| naive::mul(&naive::mul(x, &a.to_vec(), n, m), x, n, m) == b)
        .count()
}

fn gauss_naive(s: &[i64], t: &[i64], n: usize, p: i64) -> Complex64 {
    naive::all(n, p)
        .iter()
        .map(|u| {
            let uu = naive::mul(u, u, n, p);
            e(naive::trace(&naive::mul(&s.to_vec(), u, n, p), n) + naive::trace(&naive::mul(&t.to_vec(), &uu, n, p), n), p)
        })
        .sum()
}

fn mm(p: u64, k: u32, n: usize, e: &[i64]) -> ModMatrix {
    ModMatrix::from_i64(n, Modulus::new(p, k).unwrap(), e).unwrap()
}

fn near(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < 1e-9 * (1.0 + b.norm())
}

#[test]
fn kloosterman_scalar_values() {
    let k3 = eval_brute(&mm(3, 1, 1, &[1]), &mm(3, 1, 1, &[1])).unwrap().sum.to_complex();
    assert!(near(k3, Complex64::new(-1.0, 0.0)));
    let k9 = eval_brute(&mm(3, 2, 1, &[1]), &mm(3, 2, 1, &[1])).unwrap().sum.to_complex();
    let direct: Complex64 = (1..9).filter(|x| x % 3 != 0).map(|x| e(x + (1..9).find(|y| x * y % 9 == 1).unwrap(), 9)).sum();
    assert!(near(k9, direct));
    assert!(near(k9, Complex64::new(6.0 * (2.0 * TAU / 9.0).cos(), 0.0)));
}

#[test]
fn kloosterman_matches_direct_summation() {
    let cases: [(u64, u32, usize, &[i64], &[i64]); 6] = [
        (3, 1, 2, &[1, 0, 0, 1], &[1, 0, 0, 1]),
        (3, 1, 2, &[0, 1, 0, 0], &[2, 1, 1, 0]),
        (3, 2, 2, &[1, 0, 0, 1], &[1, 0, 0, 1]),
        (3, 2, 2, &[3, 1, 0, 2], &[1, 4, 6, 0]),
        (5, 2, 1, &[1], &[1]),
        (5, 2, 1, &[5], &[10]),
    ];
    for (p, k, n, a, b) in cases {
        let m = p.pow(k) as i64;
        let (am, bm) = (mm(p, k, n, a), mm(p, k, n, b));
        let want = kloosterman_naive(a, b, n, m);
        let brute = eval_brute(&am, &bm).unwrap().sum;
        assert!(near(brute.to_complex(), want), "{a:?} {b:?} mod {m}");
        if k >= 2 {
            let reduced = eval_reduced(&am, &bm).unwrap().sum;
            assert!(near(reduced.to_complex(), want), "{a:?} {b:?} mod {m}");
        }
    }
}

#[test]
fn closed_form_even_k_matches_direct_summation() {
    for (p, n, a, b) in [(5u64, 1, vec![1i64], vec![1i64]), (3, 2, vec![1, 0, 0, 1], vec![1, 0, 0, 2]), (5, 1, vec![2], vec![3])] {
        let m = (p * p) as i64;
        let got = eval_salie(&mm(p, 2, n, &a), &mm(p, 2, n, &b)).unwrap().sum.to_complex();
        assert!(near(got, kloosterman_naive(&a, &b, n, m)));
    }
}

#[test]
fn counts_match_direct_enumeration() {
    let cases: [(u64, u32, usize, &[i64], &[i64], usize); 6] = [
        (3, 1, 2, &[0, 0, 0, 0], &[0, 0, 0, 0], 48),
        (3, 1, 2, &[1, 0, 0, 1], &[0, 0, 0, 0], 0),
        (3, 1, 2, &[0, 1, 0, 0], &[0, 1, 0, 0], 6),
        (3, 1, 2, &[1, 0, 0, 1], &[1, 0, 0, 1], 14),
        (3, 1, 2, &[0, 1, 2, 0], &[0, 1, 2, 0], 6),
        (5, 2, 1, &[1], &[1], 2),
    ];
    for (p, k, n, a, b, want) in cases {
        let m = p.pow(k) as i64;
        assert_eq!(count_naive(a, b, n, m), want);
        let (am, bm) = (mm(p, k, n, a), mm(p, k, n, b));
        assert_eq!(count_brute(&am, &bm).unwrap(), BigUint::from(want));
        if k == 1 && a == b {
            assert_eq!(count_closed_mod_p(&am).unwrap().value, BigUint::from(want));
        }
        if p != 2 {
            assert_eq!(count_lifted(&am, &bm).unwrap(), BigUint::from(want));
        }
    }
    let i = [1, 0, 0, 1];
    assert_eq!(count_brute(&mm(3, 2, 2, &i), &mm(3, 2, 2, &i)).unwrap(), BigUint::from(count_naive(&i, &i, 2, 9)));
}

#[test]
fn gauss_sums_match_direct_summation() {
    for p in [3u64, 5, 7] {
        let want: Complex64 = (0..p as i64).map(|u| e(u * u, p as i64)).sum();
        assert!(near(gauss_constant(p).unwrap().value(), want));
    }
    assert!(near(gauss_constant(5).unwrap().value(), Complex64::new(5f64.sqrt(), 0.0)));
    assert!(near(gauss_constant(7).unwrap().value(), Complex64::new(0.0, 7f64.sqrt())));
    let cases: [(u64, usize, &[i64], &[i64]); 5] = [
        (5, 1, &[0], &[1]),
        (5, 1, &[0], &[2]),
        (3, 2, &[1, 2, 0, 1], &[0, 1, 0, 0]),
        (3, 2, &[0, 0, 0, 0], &[0, 1, 0, 0]),
        (5, 2, &[1, 2, 3, 4], &[1, 0, 0, 4]),
    ];
    for (p, n, s, t) in cases {
        let want = gauss_naive(s, t, n, p as i64);
        let (sm, tm) = (mm(p, 1, n, s), mm(p, 1, n, t));
        assert!(near(gauss_brute(&sm, &tm).unwrap().to_complex(), want));
        let closed = gauss_closed(&sm, &tm).unwrap();
        if want.norm() < 1e-9 {
            assert!(closed.is_zero());
        } else {
            assert!(near(closed.to_complex(p).unwrap(), want), "S={s:?} T={t:?} mod {p}");
        }
    }
}

#[test]
fn centralizers_match_direct_enumeration() {
    let g = naive::group(2, 3);
    let jordan = vec![0, 1, 0, 0];
    let centralizer = g.iter().filter(|(x, _)| naive::mul(x, &jordan, 2, 3) == naive::mul(&jordan, x, 2, 3)).count();
    assert_eq!(centralizer, 6);
    let q = BigUint::from(3u32);
    assert_eq!(Partition::new(vec![2]).centralizer_order(&q), BigUint::from(centralizer));
    assert_eq!(Partition::new(vec![1, 1]).centralizer_order(&q), BigUint::from(g.len()));
}

#[test]
fn residue_symbols_match_exponentiation() {
    // x^((q-1)/2) mod f by repeated multiplication, with q = 9
    fn power_of_x(f: &[i64; 3], e: u32) -> (i64, i64) {
        let (mut c0, mut c1) = (1i64, 0i64);
        for _ in 0..e {
            // (c0 + c1 x) x = c0 x + c1 x², with x² = -f0 - f1 x
            let (n0, n1) = (-c1 * f[0], c0 - c1 * f[1]);
            c0 = n0.rem_euclid(3);
            c1 = n1.rem_euclid(3);
        }
        (c0, c1)
    }
    for (f, want) in [([1i64, 0, 1], 1i8), ([2, 1, 1], -1)] {
        let (c0, c1) = power_of_x(&f, 4);
        assert_eq!(c1, 0);
        assert_eq!(if c0 == 1 { 1 } else { -1 }, want);
        let fp = FpPoly::from_i64(3, &f);
        assert_eq!(residue_symbol(&FpPoly::x(3), &fp).unwrap(), want);
    }
}

#[test]
fn anticommutant_dimension_matches_enumeration() {
    for c in naive::all(2, 3) {
        let direct = naive::all(2, 3)
            .iter()
            .filter(|y| {
                let (cy, yc) = (naive::mul(&c, y, 2, 3), naive::mul(y, &c, 2, 3));
                cy.iter().zip(&yc).all(|(a, b)| (a + b) % 3 == 0)
            })
            .count();
        let dim = (direct as f64).log(3.0).round() as usize;
        let m = mm(3, 1, 2, &c);
        assert_eq!(kernel_dim_direct(&m).unwrap(), dim);
        assert_eq!(kernel_dim_by_jordan_spectrum(&m).unwrap(), dim);
    }
}
