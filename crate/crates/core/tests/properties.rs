use bohrseq::bohr::{
    achieved_constants, decompose_gap, enumerate_bohr, solve_small_norm_set, verify_cover_containment, ArcSet,
    Membership,
};
use bohrseq::config::Config;
use bohrseq::harness::{on_constraint_boundary, oracle_arcs_membership, oracle_bohr, oracle_constraints};
use bohrseq::rational::{dist_to_int, int, rat, Rational};
use bohrseq::torus::{geometric_contraction_bound, linear_contraction_bound, norm_enclosure, Precision, TorusPoint};
use num_bigint::BigInt;
use proptest::prelude::*;

fn fraction(max_den: i64) -> impl Strategy<Value = Rational> {
    (1..=max_den).prop_flat_map(|q| (0..q).prop_map(move |p| rat(p, q)))
}

fn points(v: &[Rational]) -> Vec<TorusPoint> {
    v.iter().cloned().map(TorusPoint::rational).collect()
}

fn constraint_family() -> impl Strategy<Value = (Vec<u64>, Rational)> {
    (prop::collection::vec(1u64..60, 1..5), 1i64..=14).prop_map(|(ns, k)| (ns, rat(k, 30)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bohr_matches_naive_loop(
        alphas in prop::collection::vec(fraction(300), 1..=3),
        e in 10i64..=100,
        limit in 1u64..3000,
    ) {
        let eps = rat(1, e);
        let fast = enumerate_bohr(&points(&alphas), &eps, limit, &Config::default()).unwrap();
        prop_assert_eq!(fast.members(), &oracle_bohr(&alphas, &eps, limit)[..]);
    }

    #[test]
    fn covers_are_certified(
        alphas in prop::collection::vec(fraction(200), 1..=2),
        e in 4i64..=40,
        limit in 1u64..1500,
    ) {
        let cfg = Config::default();
        let pts = points(&alphas);
        let eps = rat(1, e);
        let h = enumerate_bohr(&pts, &eps, limit, &cfg).unwrap();
        prop_assume!(!h.is_empty());
        let cover = decompose_gap(&h, &cfg).unwrap();
        prop_assert!(cover.containment_verified);
        prop_assert!(verify_cover_containment(&h, &cover.generators, cfg.dp_budget).unwrap());
        let (a, b) = achieved_constants(&pts, &eps, limit, &cover.generators);
        prop_assert_eq!(a, cover.achieved_a.clone());
        prop_assert_eq!(b, cover.achieved_b.clone());
        prop_assert!(cover.c1() >= 1);
    }

    #[test]
    fn arc_engine_matches_grid((ns, c) in constraint_family()) {
        let q = 2520;
        let set = solve_small_norm_set(&ns, &c, u64::MAX).unwrap();
        let engine = oracle_arcs_membership(&set, q);
        let direct = oracle_constraints(&ns, &c, q);
        for k in 0..q {
            if !on_constraint_boundary(&ns, &c, k, q) {
                prop_assert_eq!(engine[k as usize], direct[k as usize], "k = {}", k);
            }
        }
    }

    #[test]
    fn intersection_is_conjunction(
        (xs, c) in constraint_family(),
        (ys, d) in constraint_family(),
        betas in prop::collection::vec(fraction(997), 50),
    ) {
        let x = solve_small_norm_set(&xs, &c, u64::MAX).unwrap();
        let y = solve_small_norm_set(&ys, &d, u64::MAX).unwrap();
        let both = x.intersect(&y);
        let prec = Precision::default();
        for b in betas {
            let p = TorusPoint::rational(b);
            let inside = |s: &ArcSet| s.member(&p, &prec) == Membership::Inside;
            prop_assert_eq!(inside(&both), inside(&x) && inside(&y));
        }
    }

    #[test]
    fn small_norm_measure((ns, c) in constraint_family()) {
        let set = solve_small_norm_set(&ns, &c, u64::MAX).unwrap();
        prop_assert!(set.total_length() <= int(2) * &c);
    }

    #[test]
    fn more_constraints_shrink((ns, c) in constraint_family(), extra in prop::collection::vec(1u64..60, 1..4)) {
        let small = solve_small_norm_set(&ns, &c, u64::MAX).unwrap();
        let mut all = ns.clone();
        all.extend(extra);
        let big = solve_small_norm_set(&all, &c, u64::MAX).unwrap();
        prop_assert!(small.contains(&big));
    }

    #[test]
    fn linear_contraction(u in -3000i64..=3000, n in 1u64..40, d in 1i64..333) {
        let d = rat(d, 1000);
        // near the scale d/n the hypothesis holds for some samples and not others
        let alpha = &d * rat(u, 1000) / int(n);
        let a = TorusPoint::rational(alpha.clone());
        if let Some(v) = linear_contraction_bound(&a, n, &d, &Precision::default()).unwrap() {
            prop_assert!(dist_to_int(&alpha) <= &d / int(n));
            prop_assert!(v.lo <= v.hi);
        }
    }

    #[test]
    fn geometric_contraction(u in -3000i64..=3000, w in -1000i64..=1000, n in 1u64..12, d in 1i64..166) {
        let d = rat(d, 1000);
        let scale = Rational::new(4.into(), BigInt::from(1u64) << n);
        let alpha = &d * &scale * rat(u, 1000);
        let beta = &d * rat(w, 1000) - &alpha;
        let a = TorusPoint::rational(alpha.clone());
        let b = TorusPoint::rational(beta);
        if let Some(v) = geometric_contraction_bound(&a, &b, n, &d, &Precision::default()).unwrap() {
            prop_assert!(dist_to_int(&alpha) <= &d * &scale);
            prop_assert!(v.hi <= &d * &scale);
        }
    }

    #[test]
    fn enclosures_hold_the_norm(alpha in fraction(10_000), n in 1u64..1_000_000, bits in 8u32..80) {
        let e = norm_enclosure(&BigInt::from(n), &TorusPoint::rational(alpha.clone()), bits);
        let exact = dist_to_int(&(int(n) * alpha));
        prop_assert!(e.lo <= exact && exact <= e.hi);
    }
}

#[test]
fn irrational_contraction_is_sound() {
    let prec = Precision::default();
    let s2 = bohrseq::torus::make_point(&bohrseq::torus::PointDescriptor::Sqrt {
        radicand: 2,
        p: None,
        q: None,
    })
    .unwrap();
    // 12 sqrt 2 is close to 17
    let a = s2.mul_int(&BigInt::from(12));
    let v = linear_contraction_bound(&a, 2, &rat(1, 10), &prec).unwrap().unwrap();
    assert!(v.hi <= rat(1, 20));
    assert!(linear_contraction_bound(&s2, 2, &rat(1, 10), &prec).unwrap().is_none());
}
