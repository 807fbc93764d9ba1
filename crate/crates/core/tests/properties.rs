use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

use kloo_core::charsum::CharSum;
use kloo_core::counting::{count_brute, count_closed_mod_p, count_lifted};
use kloo_core::gaussmat::{gauss_brute, gauss_closed};
use kloo_core::kloosterman::{brute_sum, reduced_sum};
use kloo_core::matrixcore::ModMatrix;
use kloo_core::modring::{poly_factor, FpPoly, Modulus};
use kloo_core::par::Exec;
use kloo_core::partitions::{gl_order, Partition};
use kloo_core::sylvester::{kernel_dim_by_jordan_spectrum, kernel_dim_direct};

fn matrix(n: usize, p: u64, k: u32) -> impl Strategy<Value = ModMatrix> {
    let r = Modulus::new(p, k).unwrap();
    prop::collection::vec(0..r.m(), n * n).prop_map(move |e| ModMatrix::new(n, r, e).unwrap())
}

fn unit(n: usize, p: u64, k: u32) -> impl Strategy<Value = ModMatrix> {
    matrix(n, p, k).prop_filter("invertible", |m| m.is_invertible())
}

fn close(a: num_complex::Complex64, b: num_complex::Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unit_times_inverse_is_one(a in 1u64..729) {
        let r = Modulus::new(3, 6).unwrap();
        if let Some(b) = r.inv(a) {
            prop_assert_eq!(r.mul(a, b), 1);
        } else {
            prop_assert_eq!(a % 3, 0);
        }
    }

    #[test]
    fn factorization_round_trips(p in prop::sample::select(vec![2u64, 3, 5]), lower in prop::collection::vec(0u64..5, 0..=4)) {
        let mut coeffs: Vec<u64> = lower.iter().map(|c| c % p).collect();
        coeffs.push(1);
        let m = FpPoly::new(p, coeffs);
        let back = poly_factor(&m).iter().fold(FpPoly::one(p), |acc, (f, e)| acc.mul(&f.pow(*e)));
        prop_assert_eq!(back, m);
    }

    #[test]
    fn smith_form_is_unit_invariant(m in matrix(3, 3, 2), u in unit(3, 3, 2), v in unit(3, 3, 2)) {
        let umv = u.mul(&m).unwrap().mul(&v).unwrap();
        prop_assert_eq!(m.smith_form(), umv.smith_form());
    }

    #[test]
    fn canonicalize_is_idempotent_and_value_preserving(
        (p, k) in prop::sample::select(vec![(3u64, 1u32), (3, 2), (3, 3), (5, 1), (5, 2)]),
        raw in prop::collection::vec(-50i64..50, 27),
    ) {
        let r = Modulus::new(p, k).unwrap();
        let s = CharSum::from_counts(r, &raw[..r.m() as usize]);
        let c = s.canonicalize();
        prop_assert!(c.is_canonical());
        prop_assert_eq!(c.canonicalize(), c.clone());
        prop_assert!((s.to_complex() - c.to_complex()).norm() < 1e-9 * (1.0 + s.coeffs().len() as f64 * 50.0));
    }

    #[test]
    fn charsum_is_linear(raw_a in prop::collection::vec(-20i64..20, 25), raw_b in prop::collection::vec(-20i64..20, 25)) {
        let r = Modulus::new(5, 2).unwrap();
        let a = CharSum::from_counts(r, &raw_a);
        let b = CharSum::from_counts(r, &raw_b);
        let mut sum = a.clone();
        sum.merge(&b).unwrap();
        prop_assert!((sum.to_complex() - a.to_complex() - b.to_complex()).norm() < 1e-9);
    }

    #[test]
    fn dual_is_an_involution(parts in prop::collection::vec(1u32..6, 0..6)) {
        let lam = Partition::new(parts);
        prop_assert_eq!(lam.dual().dual(), lam.clone());
        prop_assert_eq!(lam.dual().size(), lam.size());
    }

    #[test]
    fn centralizer_divides_group_order(parts in prop::collection::vec(1u32..4, 1..4), q in prop::sample::select(vec![2u32, 3, 4, 5])) {
        let lam = Partition::new(parts);
        let q = BigUint::from(q);
        let z = lam.centralizer_order(&q);
        prop_assert_eq!(gl_order(lam.size(), &q) % z, BigUint::from(0u32));
    }

    #[test]
    fn anticommutant_dimension_matches_spectrum(c in matrix(3, 5, 1)) {
        prop_assert_eq!(kernel_dim_by_jordan_spectrum(&c).unwrap(), kernel_dim_direct(&c).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_count_matches_brute(c in matrix(2, 5, 1)) {
        prop_assert_eq!(count_closed_mod_p(&c).unwrap().value, count_brute(&c, &c).unwrap());
    }

    #[test]
    fn lifted_count_matches_brute(a in matrix(2, 3, 2), b in matrix(2, 3, 2)) {
        prop_assert_eq!(count_lifted(&a, &b).unwrap(), count_brute(&a, &b).unwrap());
    }

    #[test]
    fn count_is_invariant_under_substitution(a in matrix(2, 3, 1), b in matrix(2, 3, 1), x in unit(2, 3, 1)) {
        let xa = x.mul(&a).unwrap();
        let bx = b.mul(&x.inverse().unwrap()).unwrap();
        prop_assert_eq!(count_brute(&a, &b).unwrap(), count_brute(&xa, &bx).unwrap());
    }

    #[test]
    fn gauss_closed_matches_brute(s in matrix(2, 3, 1), t in matrix(2, 3, 1)) {
        let brute = gauss_brute(&s, &t).unwrap();
        let closed = gauss_closed(&s, &t).unwrap();
        if closed.is_zero() {
            prop_assert!(brute.is_zero_value());
        } else {
            prop_assert!(closed.to_charsum(3).unwrap().value_eq(&brute));
            prop_assert!(close(closed.to_complex(3).unwrap(), brute.to_complex(), 1e-6));
        }
    }

    #[test]
    fn reduced_sum_equals_brute_sum(a in matrix(2, 3, 2), b in matrix(2, 3, 2)) {
        let brute = brute_sum(Exec::Parallel, &a, &b).unwrap();
        let reduced = reduced_sum(Exec::Sequential, &a, &b).unwrap();
        prop_assert_eq!(brute.canonicalize(), reduced.canonicalize());
    }

    #[test]
    fn reduced_sum_equals_brute_sum_odd(a in matrix(1, 3, 3), b in matrix(1, 3, 3)) {
        let brute = brute_sum(Exec::Sequential, &a, &b).unwrap();
        prop_assert_eq!(brute.canonicalize(), reduced_sum(Exec::Parallel, &a, &b).unwrap().canonicalize());
    }

    #[test]
    fn kloosterman_sum_is_invariant_under_units(a in matrix(2, 3, 2), b in matrix(2, 3, 2), u in unit(2, 3, 2), v in unit(2, 3, 2)) {
        let a2 = u.mul(&a).unwrap().mul(&v).unwrap();
        let b2 = v.inverse().unwrap().mul(&b).unwrap().mul(&u.inverse().unwrap()).unwrap();
        let k1 = brute_sum(Exec::Parallel, &a, &b).unwrap();
        let k2 = brute_sum(Exec::Parallel, &a2, &b2).unwrap();
        prop_assert!(k1.value_eq(&k2));
    }
}

#[test]
fn full_residue_sum_vanishes() {
    for (p, k) in [(3u64, 1u32), (3, 3), (5, 2), (7, 1)] {
        let r = Modulus::new(p, k).unwrap();
        let s = CharSum::from_counts(r, &vec![1; r.m() as usize]);
        assert!(s.is_zero_value(), "mod {}", r.m());
        assert!(s.scale(&BigInt::from(7)).canonicalize().coeffs().iter().all(|c| *c == BigInt::from(0)));
    }
}
