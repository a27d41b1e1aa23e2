use fermat_bias::arith::{is_prime, residue_degree};
use fermat_bias::curves::{ap_from_jacobi, base_change_roots, count_points_bruteforce, eigenvalues_over_q};
use fermat_bias::fields::{build_extension_field_table, primes_above, DEFAULT_TABLE_CAP};
use fermat_bias::jacobi::{compute_jacobi_prime, even_degree_value, jacobi_sum, Strategy as Method};
use fermat_bias::verify::multiset_distance;
use fermat_bias::{CurveId, CurveKind, CycInt};
use num_complex::Complex64;
use proptest::prelude::*;

fn arb_level() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![3u32, 5, 7, 11, 13])
}

/// A prime `p != ell` below `bound`.
fn arb_prime(bound: u64) -> impl Strategy<Value = u64> {
    (2..bound).prop_filter("prime", |&p| is_prime(p))
}

/// Field size for `p` at level `ell`, if small enough to tabulate quickly.
fn small_q(p: u64, ell: u32) -> Option<u128> {
    let f = residue_degree(p, ell).ok()?;
    (p as u128).checked_pow(f).filter(|&q| q <= 200_000)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_the_field_size(ell in arb_level(), p in arb_prime(3000)) {
        prop_assume!(p != ell as u64);
        prop_assume!(small_q(p, ell).is_some() || residue_degree(p, ell).unwrap() % 2 == 0);
        let j = compute_jacobi_prime(p, ell, DEFAULT_TABLE_CAP, Method::Auto).unwrap();
        let q = CycInt::from_int(ell, j.norm());
        for (k1, k2) in j.index_set().pairs() {
            prop_assert_eq!(j.value(k1 as u64, k2 as u64).unwrap().abs_square(), q.clone());
        }
    }

    #[test]
    fn orbit_values_match_direct_sums(ell in arb_level(), p in arb_prime(3000)) {
        prop_assume!(p != ell as u64);
        prop_assume!(small_q(p, ell).is_some());
        let f = residue_degree(p, ell).unwrap();
        let table = build_extension_field_table(p, f, ell, DEFAULT_TABLE_CAP).unwrap();
        let j = compute_jacobi_prime(p, ell, DEFAULT_TABLE_CAP, Method::Table).unwrap();
        for (k1, k2) in j.index_set().pairs() {
            prop_assert_eq!(jacobi_sum(&table, k1 as u64, k2 as u64).unwrap(), j.value(k1 as u64, k2 as u64).unwrap());
        }
        if f % 2 == 0 {
            prop_assert!(j.reps().iter().all(|r| *r == even_degree_value(p, f, ell)));
        }
    }

    #[test]
    fn values_at_twisted_primes_are_conjugates(ell in arb_level(), p in arb_prime(3000)) {
        prop_assume!(p != ell as u64);
        prop_assume!(small_q(p, ell).is_some() || residue_degree(p, ell).unwrap() % 2 == 0);
        let j = compute_jacobi_prime(p, ell, DEFAULT_TABLE_CAP, Method::Auto).unwrap();
        for pr in primes_above(p, ell) {
            for (k1, k2) in j.index_set().pairs() {
                let v = j.value_at(&pr, k1 as u64, k2 as u64).unwrap();
                let sigma = fermat_bias::GaloisElement::new(pr.t as i64, ell).unwrap();
                prop_assert_eq!(v, j.value(k1 as u64, k2 as u64).unwrap().galois(sigma).unwrap());
            }
        }
    }

    #[test]
    fn traces_count_points(ell in prop::sample::select(vec![3u32, 5, 7]), p in arb_prime(1500)) {
        prop_assume!(p != ell as u64);
        prop_assume!(small_q(p, ell).is_some() || residue_degree(p, ell).unwrap() % 2 == 0);
        let j = compute_jacobi_prime(p, ell, DEFAULT_TABLE_CAP, Method::Auto).unwrap();
        let mut quotients = 0;
        for c in CurveId::all(ell) {
            let ap = ap_from_jacobi(&j, c).unwrap();
            prop_assert_eq!(ap, p as i64 + 1 - count_points_bruteforce(c, p, 1).unwrap() as i64);
            let two_g = 2 * c.genus() as i64;
            prop_assert!((ap * ap) as u128 <= (two_g * two_g) as u128 * p as u128);
            if matches!(c.kind, CurveKind::Quotient(_)) {
                quotients += ap;
            }
        }
        prop_assert_eq!(ap_from_jacobi(&j, CurveId::fermat(ell)).unwrap(), quotients);
    }

    #[test]
    fn base_change_matches(ell in prop::sample::select(vec![3u32, 5, 7]), p in arb_prime(1000)) {
        prop_assume!(p != ell as u64);
        prop_assume!(small_q(p, ell).is_some());
        let j = compute_jacobi_prime(p, ell, DEFAULT_TABLE_CAP, Method::Auto).unwrap();
        let scale = (p as f64).sqrt();
        for c in CurveId::all(ell) {
            let over_q = eigenvalues_over_q(&j, c).unwrap();
            let repeated: Vec<Complex64> = (0..ell - 1).flat_map(|_| over_q.iter().map(|e| e / scale)).collect();
            let over_f: Vec<Complex64> = base_change_roots(&j, c).unwrap().iter().map(|e| e / scale).collect();
            prop_assert!(multiset_distance(&repeated, &over_f).is_some_and(|d| d <= 1e-9));
        }
    }
}
