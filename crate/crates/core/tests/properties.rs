use std::collections::HashMap;

use proptest::prelude::*;

use icdof_core::channel::ChannelMatrix;
use icdof_core::dof::{hlambda_bound, prop1_bound, theorem3_ratio};
use icdof_core::sumset::{
    attains_progression_bound, check_trivial_bounds, entropy_inequality_suite, same_step_progressions,
    sumset,
};
use icdof_core::{Dist, ExactScalar, Generator, Monomial, Rational, RationalDist, ScalarSet};

const GENS: [&str; 3] = ["pr_x", "pr_y", "pr_z"];

fn scalar() -> impl Strategy<Value = ExactScalar> {
    proptest::collection::vec((-6i64..7, 1i64..5, 0u32..3, 0u32..3, 0u32..3), 0..5).prop_map(|terms| {
        ExactScalar::from_terms(terms.into_iter().map(|(n, d, a, b, c)| {
            let m = Monomial::from_powers(
                GENS.iter().map(|g| Generator::named(g)).zip([a, b, c]),
            );
            (m, Rational::new(n, d))
        }))
    })
}

fn rational_dist(max_support: usize) -> impl Strategy<Value = RationalDist> {
    proptest::collection::btree_map(-8i64..9, 1i64..50, 1..=max_support).prop_map(|m| {
        let (support, weights): (Vec<_>, Vec<_>) = m
            .into_iter()
            .map(|(x, w)| (Rational::from_integer(x), Rational::from_integer(w)))
            .unzip();
        RationalDist::from_weights(support, &weights).unwrap()
    })
}

fn symbolic_dist() -> impl Strategy<Value = Dist> {
    proptest::collection::vec((scalar(), 1i64..20), 1..5).prop_filter_map("distinct support", |atoms| {
        let total: i64 = atoms.iter().map(|a| a.1).sum();
        Dist::from_atoms(atoms.into_iter().map(|(v, w)| (v, Rational::new(w, total)))).ok()
    })
}

fn int_set(max: usize) -> impl Strategy<Value = ScalarSet> {
    proptest::collection::vec(-40i64..40, 1..=max)
        .prop_map(|xs| ScalarSet::new(xs.into_iter().map(ExactScalar::from_integer)))
}

fn mixed_set(max: usize) -> impl Strategy<Value = ScalarSet> {
    proptest::collection::vec(scalar(), 1..=max).prop_map(ScalarSet::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ring_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a + &(-&a)).is_zero());
        prop_assert!((&a * &b).is_canonical() && (&a + &c).is_canonical());
        let again = ExactScalar::from_terms(a.terms());
        prop_assert_eq!(again, a);
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in scalar(), b in scalar(), x in -8.0f64..8.0, y in -8.0f64..8.0, z in -8.0f64..8.0) {
        let env: HashMap<String, f64> = GENS.iter().map(|g| g.to_string()).zip([x, y, z]).collect();
        let (ea, eb) = (a.eval_float(&env).unwrap(), b.eval_float(&env).unwrap());
        let sum = (&a + &b).eval_float(&env).unwrap();
        let prod = (&a * &b).eval_float(&env).unwrap();
        let scale = 1.0 + ea.abs() + eb.abs();
        prop_assert!((sum - (ea + eb)).abs() <= 1e-9 * scale);
        prop_assert!((prod - ea * eb).abs() <= 1e-9 * scale * scale);
    }

    #[test]
    fn display_round_trips(a in scalar()) {
        prop_assert_eq!(a.to_string().parse::<ExactScalar>().unwrap(), a);
    }

    #[test]
    fn distribution_invariants(a in symbolic_dist(), b in symbolic_dist(), c in symbolic_dist(), k in scalar()) {
        let one = Rational::from_integer(1);
        let ab = a.convolve(&b).unwrap();
        prop_assert_eq!(ab.total_mass(), one.clone());
        prop_assert_eq!(&ab, &b.convolve(&a).unwrap());
        prop_assert_eq!(ab.convolve(&c).unwrap(), a.convolve(&b.convolve(&c).unwrap()).unwrap());
        let (ha, hb, hab) = (a.entropy_bits(), b.entropy_bits(), ab.entropy_bits());
        prop_assert!(hab >= ha.max(hb) - 1e-12);
        prop_assert!(hab <= ha + hb + 1e-12);
        if !k.is_zero() {
            let s = a.scale(&k).unwrap();
            prop_assert_eq!(s.total_mass(), one);
            prop_assert_eq!(s.entropy_bits(), ha);
        }
    }

    #[test]
    fn entropy_suite_holds(u in rational_dist(12), v in rational_dist(12)) {
        let s = entropy_inequality_suite(&u, &v).unwrap();
        prop_assert!(s.min_slack() >= -1e-9);
        if let Some(r) = s.sum_difference_ratio {
            prop_assert!(r >= 2.0 / 3.0 - 1e-9);
        }
    }

    #[test]
    fn hlambda_minus_one_at_most_four_thirds(u in rational_dist(12), v in rational_dist(12)) {
        if let Ok(b) = hlambda_bound(&Rational::from(-1), &u, &v) {
            prop_assert!(b <= 4.0 / 3.0 + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn trivial_sumset_bounds(a in mixed_set(50), b in mixed_set(50)) {
        let t = check_trivial_bounds(&a, &b).unwrap();
        prop_assert!(t.lower_ok && t.upper_ok);
    }

    #[test]
    fn integer_sumset_lower_bound(a in int_set(20), b in int_set(20)) {
        let s = sumset(&a, &b).unwrap();
        prop_assert!(s.len() + 1 >= a.len() + b.len());
        prop_assert_eq!(
            attains_progression_bound(&a, &b).unwrap(),
            same_step_progressions(&a, &b).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prop1_terms_are_bounded(ws in proptest::collection::vec(rational_dist(4), 3), r_log in 0.5f64..12.0) {
        let h = ChannelMatrix::generic(3).unwrap();
        let w: Vec<Dist> = ws.iter().map(|d| d.map_support(ExactScalar::from_rational).unwrap()).collect();
        let r = prop1_bound(&h, &w, r_log).unwrap();
        let total: f64 = r.per_user.iter().map(|t| t.clamped_term).sum();
        prop_assert!((r.bound - total).abs() <= 1e-12);
        for t in &r.per_user {
            prop_assert!((0.0..=1.0).contains(&t.clamped_term));
            prop_assert!(t.full_entropy_bits >= t.interference_entropy_bits - 1e-12);
        }
    }

    #[test]
    fn theorem3_depends_only_on_the_linear_forms(
        ws in proptest::collection::vec(rational_dist(4), 3),
        cs in proptest::collection::vec((1i64..5, 1i64..4, any::<bool>()), 3),
        entries in proptest::collection::vec(-3i64..4, 9),
    ) {
        let rows: Vec<Vec<i64>> = entries.chunks(3).map(|c| c.to_vec()).collect();
        let h = ChannelMatrix::from_integers(&rows).unwrap();
        let w: Vec<Dist> = ws.iter().map(|d| d.map_support(ExactScalar::from_rational).unwrap()).collect();
        let c: Vec<Rational> = cs.iter().map(|&(n, d, neg)| Rational::new(if neg { -n } else { n }, d)).collect();
        // W_j → c_j·W_j together with column j divided by c_j
        let scaled_w: Vec<Dist> = w.iter().zip(&c).map(|(d, c)| d.scale(&ExactScalar::from_rational(c)).unwrap()).collect();
        let scaled_h = ChannelMatrix::new(
            h.rows().iter().map(|r| r.iter().zip(&c).map(|(e, c)| e.scale(&c.recip())).collect()).collect(),
        ).unwrap();
        match (theorem3_ratio(&h, &w), theorem3_ratio(&scaled_h, &scaled_w)) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a - b).abs() <= 1e-12);
                prop_assert!((0.0..=3.0 + 1e-12).contains(&a));
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "mismatch {:?}", other),
        }
    }
}
