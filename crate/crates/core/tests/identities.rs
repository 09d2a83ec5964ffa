//! Algebraic identities of the effect decomposition.

mod common;

use common::{any_case, case_strategy, contrast_strategy, rel_close};
use mzipmed_core::mediation::params::{effect_values, Contrast};
use mzipmed_core::mediation::{
    effects_at, effects_continuous, MediationSpec, MediatorType, OutcomeFit, Scale,
};
use mzipmed_core::glm::LinearFit;
use mzipmed_core::mzip::MzipFit;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const MEDIATORS: [MediatorType; 2] = [MediatorType::Continuous, MediatorType::Binary];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn total_effect_decomposes((t, k) in any_case()) {
        for mediator in MEDIATORS {
            let (l, p) = (t.layout(mediator), t.flat(mediator));
            let r = effects_at(l, &p, &k, Scale::Ratio).unwrap();
            prop_assert!(rel_close(r.te.estimate, r.nde.estimate * r.nie.estimate, 1e-12));
            let w = effect_values(l, &p, &k, Scale::Ratio).unwrap();
            prop_assert!(rel_close(w.te.exp(), w.nde.exp() * w.nie.exp(), 1e-12));
            let d = effects_at(l, &p, &k, Scale::Difference).unwrap();
            prop_assert!(rel_close(d.te.estimate, d.nde.estimate + d.nie.estimate, 1e-12));
        }
    }

    #[test]
    fn cde_equals_nde_without_interaction((t, k) in case_strategy(false)) {
        for mediator in MEDIATORS {
            let e = effects_at(t.layout(mediator), &t.flat(mediator), &k, Scale::Ratio).unwrap();
            prop_assert_eq!(e.cde.estimate, e.nde.estimate);
        }
    }

    #[test]
    fn ratio_effects_ignore_covariate_point(
        (t, k) in case_strategy(false),
        other in contrast_strategy(2),
    ) {
        let c2: Vec<f64> = other.c.iter().take(k.c.len()).copied().collect();
        let k2 = Contrast { c: c2, ..k.clone() };
        let cont = |k: &Contrast| effects_at(t.layout(MediatorType::Continuous), &t.flat(MediatorType::Continuous), k, Scale::Ratio).unwrap();
        let (a, b) = (cont(&k), cont(&k2));
        prop_assert_eq!(a, b);
        let bin = |k: &Contrast| effects_at(t.layout(MediatorType::Binary), &t.flat(MediatorType::Binary), k, Scale::Ratio).unwrap();
        let (a, b) = (bin(&k), bin(&k2));
        prop_assert_eq!(a.nde, b.nde);
        prop_assert_eq!(a.cde, b.cde);
    }

    #[test]
    fn equal_exposures_give_null_effects((t, k) in any_case()) {
        let k = Contrast { x_star: k.x, ..k };
        for mediator in MEDIATORS {
            let (l, p) = (t.layout(mediator), t.flat(mediator));
            let r = effects_at(l, &p, &k, Scale::Ratio).unwrap();
            prop_assert_eq!([r.nde.estimate, r.nie.estimate, r.cde.estimate, r.te.estimate], [1.0; 4]);
            let d = effects_at(l, &p, &k, Scale::Difference).unwrap();
            prop_assert_eq!([d.nde.estimate, d.nie.estimate, d.cde.estimate, d.te.estimate], [0.0; 4]);
        }
    }

    #[test]
    fn excess_zero_coefficients_do_not_enter(
        (t, k) in case_strategy(false),
        shift in prop::collection::vec(-2.0..2.0f64, 5),
    ) {
        let p = t.alpha.len();
        let fit = |gamma: DVector<f64>| OutcomeFit::Mzip(MzipFit {
            alpha: DVector::from_column_slice(&t.alpha),
            gamma,
            loglik: 0.0,
            cov_joint: DMatrix::identity(2 * p, 2 * p) * 0.01,
            cov_joint_robust: DMatrix::identity(2 * p, 2 * p) * 0.01,
            converged: true,
            iterations: 1,
            gradient_norm: 0.0,
            n: 100,
            p,
        });
        let med = LinearFit {
            theta: DVector::from_column_slice(&t.theta),
            sigma2: t.sigma2,
            sigma2_var: 0.01,
            cov_theta: DMatrix::identity(t.theta.len(), t.theta.len()) * 0.01,
            n: 100,
            p: t.theta.len(),
        };
        let spec = MediationSpec { x: k.x, x_star: k.x_star, c: Some(k.c.clone()), m_cde: k.m_cde, ..Default::default() };
        let a = effects_continuous(&fit(DVector::zeros(p)), &med, &spec).unwrap();
        let b = effects_continuous(&fit(DVector::from_fn(p, |i, _| shift[i % 5])), &med, &spec).unwrap();
        prop_assert_eq!(a, b);
    }
}
