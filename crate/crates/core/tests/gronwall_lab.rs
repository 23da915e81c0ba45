use std::sync::OnceLock;

use proptest::prelude::*;
use sdelab::gronwall::{
    c_p, counterexample_ensemble, evaluate_gronwall, gbm_square_ensemble, gronwall_bound, lenglart_moment,
    lenglart_tail, verify_gronwall, DominatedPair, GronwallEnsemble, Variant, Verdict,
};
use sdelab::SdeError;

fn gbm_ensemble() -> &'static GronwallEnsemble {
    static ENS: OnceLock<GronwallEnsemble> = OnceLock::new();
    ENS.get_or_init(|| gbm_square_ensemble(0.1, 0.3, 1.0, 32, 1.0, 400, 17).unwrap())
}

#[test]
fn predictable_variant_fails_for_the_counterexample() {
    // q = 0.99, α = p = 0.5: E[S_+^p] ≈ 9.95 against (c_p/p) E[S_-^p] = 2 c_{1/2} ≈ 5.657
    let ens = counterexample_ensemble(0.99, 0.5, 200_000, 5).unwrap();
    assert!(!ens.h_predictable());
    let r = evaluate_gronwall(&ens, Variant::A, 0.5).unwrap();
    assert_eq!(r.verdict, Verdict::Violated);
    assert!((r.rhs - 2.0 * c_p(0.5).unwrap() * r.h_stat).abs() < 1e-12);
    assert!(r.lhs_ci[0] > 5.657 * 1.3);
    // the general variant still holds: (c_p/p) (E S_-)^p = 5.657 * 10
    let c = verify_gronwall(&ens, Variant::C, 0.5).unwrap();
    assert!(c.verdict.holds());
}

#[test]
fn certified_gbm_ensemble_satisfies_all_applicable_variants() {
    let ens = gbm_ensemble();
    assert!(ens.h_predictable());
    for p in [0.2, 0.5, 0.8] {
        assert!(verify_gronwall(ens, Variant::A, p).unwrap().verdict.holds());
        assert!(verify_gronwall(ens, Variant::C, p).unwrap().verdict.holds());
    }
    // Brownian martingale increments jump both ways on the grid
    assert!(matches!(
        verify_gronwall(ens, Variant::B, 0.5),
        Err(SdeError::Precondition(_))
    ));
    assert!(matches!(
        verify_gronwall(ens, Variant::C, 1.0),
        Err(SdeError::Domain(_))
    ));
}

#[test]
fn report_serializes_documented_fields() {
    let r = verify_gronwall(gbm_ensemble(), Variant::C, 0.5).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in [
        "variant",
        "p",
        "lhs",
        "lhs_ci",
        "rhs",
        "verdict",
        "replications",
        "seed",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["variant"], "c");
    assert_eq!(v["verdict"], "holds");
    assert_eq!(v["replications"], 400);
}

#[test]
fn lenglart_tail_and_moment_hold_for_certified_pairs() {
    let pairs = [
        DominatedPair::BrownianSquare { steps: 256 },
        DominatedPair::Deterministic { level: 2.5 },
        DominatedPair::Counting {
            rate: 3.0,
            horizon: 1.0,
        },
    ];
    for pair in pairs {
        let s = pair.sample(5_000, 8).unwrap();
        for (c, d) in [(0.5, 0.5), (1.0, 2.0), (4.0, 10.0)] {
            assert!(lenglart_tail(&s, c, d).unwrap().verdict.holds(), "{pair:?} c={c} d={d}");
        }
        for p in [0.1, 0.5, 0.9] {
            assert!(lenglart_moment(&s, p).unwrap().verdict.holds(), "{pair:?} p={p}");
        }
    }
}

/// `P(sup_{[0,1]} |B| > 1)` from the exit-time series of Brownian motion from (-1, 1).
fn two_sided_exit_probability() -> f64 {
    let pi = std::f64::consts::PI;
    let stay: f64 = (0..50)
        .map(|k| {
            let m = (2 * k + 1) as f64;
            (-1f64).powi(k) / m * (-m * m * pi * pi / 8.0).exp()
        })
        .sum::<f64>()
        * 4.0
        / pi;
    1.0 - stay
}

#[test]
fn brownian_square_tail_matches_the_exit_series() {
    let oracle = two_sided_exit_probability();
    assert!((oracle - 0.6292).abs() < 1e-4);
    let s = DominatedPair::BrownianSquare { steps: 2048 }
        .sample(20_000, 21)
        .unwrap();
    let tail = lenglart_tail(&s, 1.0, 1.0).unwrap();
    // discrete monitoring misses crossings: the barrier shifts by about 0.58 sqrt(h)
    assert!(tail.lhs.mean < oracle + 4.0 * tail.lhs.std_err);
    assert!(tail.lhs.mean > oracle - 0.03, "{} vs {oracle}", tail.lhs.mean);
}

#[test]
fn bound_is_monotone_in_its_inputs() {
    for v in [Variant::A, Variant::B, Variant::C] {
        let base = gronwall_bound(v, 0.4, 0.5, 2.0).unwrap();
        assert!(gronwall_bound(v, 0.4, 0.6, 2.0).unwrap() > base);
        assert!(gronwall_bound(v, 0.4, 0.5, 3.0).unwrap() > base);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn verdicts_are_invariant_under_scaling(c in 0.1f64..10.0, p in 0.1f64..0.9) {
        let ens = gbm_ensemble();
        let scaled = ens.scaled(c).unwrap();
        let (a, b) = (
            verify_gronwall(ens, Variant::C, p).unwrap(),
            verify_gronwall(&scaled, Variant::C, p).unwrap(),
        );
        prop_assert_eq!(a.verdict, b.verdict);
        let k = c.powf(p);
        prop_assert!((b.lhs - k * a.lhs).abs() <= 1e-9 * b.lhs);
        prop_assert!((b.rhs - k * a.rhs).abs() <= 1e-9 * b.rhs);
    }

    #[test]
    fn lenglart_scales_homogeneously(c in 0.1f64..10.0, p in 0.1f64..0.9) {
        let s = DominatedPair::Counting { rate: 2.0, horizon: 1.0 }.sample(300, 1).unwrap();
        let (a, b) = (lenglart_moment(&s, p).unwrap(), lenglart_moment(&s.scaled(c), p).unwrap());
        prop_assert!((b.lhs.mean - c.powf(p) * a.lhs.mean).abs() <= 1e-9 * b.lhs.mean.max(1e-300));
        prop_assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn c_p_exceeds_one_and_grows(p in 0.01f64..0.98) {
        let (lo, hi) = (c_p(p).unwrap(), c_p(p + 0.01).unwrap());
        prop_assert!(lo > 1.0);
        prop_assert!(hi > lo);
    }
}
