//! Closed-form mediation effects against numerical integration of the
//! counterfactual means.

mod common;

use common::{any_case, check_binary_oracle, check_continuous_oracle, gauss_hermite, rel_close};
use mzipmed_core::mediation::{effects_at, MediatorType, Scale};
use proptest::prelude::*;

#[test]
fn hermite_rule_integrates_moments() {
    let (t, w) = gauss_hermite(20);
    let pi_sqrt = std::f64::consts::PI.sqrt();
    let m0: f64 = w.iter().sum();
    let m2: f64 = t.iter().zip(&w).map(|(t, w)| w * t * t).sum();
    let m4: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(4)).sum();
    assert!((m0 - pi_sqrt).abs() < 1e-13);
    assert!((m2 - pi_sqrt / 2.0).abs() < 1e-13);
    assert!((m4 - 0.75 * pi_sqrt).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn continuous_ratio_matches_quadrature((t, k) in any_case()) {
        let r = check_continuous_oracle(&t, &k, Scale::Ratio, 1e-6);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn continuous_difference_matches_quadrature((t, k) in any_case()) {
        let r = check_continuous_oracle(&t, &k, Scale::Difference, 1e-6);
        prop_assert!(r.is_ok(), "{:?}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn binary_ratio_matches_enumeration((t, k) in any_case()) {
        let r = check_binary_oracle(&t, &k, Scale::Ratio, 1e-12);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn binary_difference_matches_enumeration((t, k) in any_case()) {
        let r = check_binary_oracle(&t, &k, Scale::Difference, 1e-12);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn cde_matches_conditional_means((t, k) in any_case(), binary in any::<bool>(), ratio in any::<bool>()) {
        let mediator = if binary { MediatorType::Binary } else { MediatorType::Continuous };
        let scale = if ratio { Scale::Ratio } else { Scale::Difference };
        let (hi, lo) = (t.cond_mean(k.x, k.m_cde, &k.c), t.cond_mean(k.x_star, k.m_cde, &k.c));
        let want = if ratio { hi / lo } else { hi - lo };
        let got = effects_at(t.layout(mediator), &t.flat(mediator), &k, scale).unwrap();
        prop_assert!(rel_close(got.cde.estimate, want, 1e-12), "CDE {} vs {}", got.cde.estimate, want);
    }
}
