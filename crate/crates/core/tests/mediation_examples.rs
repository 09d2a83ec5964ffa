//! End-to-end mediation and simulation-study checks on generated data.

use mzipmed_core::mediation::{
    bootstrap_mediation_data, confidence_interval, delta_se_binary, fit_models, z_value, MediatorFit,
};
use mzipmed_core::optimizer::OptimSettings;
use mzipmed_core::simulation::{generate, run_study, true_effects, ScenarioConfig};
use mzipmed_core::{mediate, EffectKind, MediationData, MediationSpec, MediatorType, OutcomeModel, Scale, SeMethod};

fn scenario(name: &str, n: usize, seed: u64) -> MediationData {
    generate(&ScenarioConfig::preset(name).unwrap().with_n(n), seed).unwrap().mediation_data().unwrap()
}

fn spec_at_c2() -> MediationSpec {
    MediationSpec { c: Some(vec![2.0]), ..MediationSpec::default() }
}

#[test]
fn scenario_one_nde_recovered_within_three_se() {
    let data = generate(&ScenarioConfig::preset("scenario1").unwrap().with_n(5000), 21).unwrap();
    let res = mediate(&data, &spec_at_c2()).unwrap();
    let nde = res.effects.nde;
    let se = nde.se.unwrap();
    assert!((nde.estimate.ln() - 1.51f64.ln()).abs() < 3.0 * se, "NDE {} se {se}", nde.estimate);
}

#[test]
fn equal_exposures_bootstrap_to_null() {
    let data = scenario("scenario1", 400, 22);
    let spec = MediationSpec { x: 1.0, x_star: 1.0, ..spec_at_c2() };
    let out = bootstrap_mediation_data(&data, &spec, 50, 1).unwrap();
    for r in &out.replicates {
        assert_eq!(r, &[0.0; 4]);
    }
    for kind in [EffectKind::Nde, EffectKind::Nie, EffectKind::Cde, EffectKind::Te] {
        let e = out.effects.get(kind);
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.ci, Some([1.0, 1.0]));
    }
}

#[test]
fn bootstrap_is_deterministic() {
    let data = scenario("scenario1", 300, 23);
    let a = bootstrap_mediation_data(&data, &spec_at_c2(), 1000, 5).unwrap();
    let b = bootstrap_mediation_data(&data, &spec_at_c2(), 1000, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn binary_delta_agrees_with_bootstrap() {
    let data = scenario("binary1", 2000, 24);
    let base = MediationSpec { mediator_type: MediatorType::Binary, ..spec_at_c2() };
    let fitted = fit_models(&data, &base, &OptimSettings::default()).unwrap();
    let MediatorFit::Logistic(med) = &fitted.mediator else { panic!("expected logistic mediator") };
    let delta = delta_se_binary(&fitted.outcome, med, &base, false).unwrap();
    let boot = bootstrap_mediation_data(&data, &base, 400, 9).unwrap();
    for (kind, d) in [(EffectKind::Nde, delta.nde), (EffectKind::Nie, delta.nie)] {
        let b = boot.effects.get(kind).se.unwrap();
        assert!((d / b - 1.0).abs() < 0.15, "{kind:?}: delta {d}, bootstrap {b}");
    }
}

#[test]
fn published_interval_round_trips() {
    let (lo, hi) = (1.14f64, 1.23f64);
    let z = z_value(0.95);
    let se = (hi / lo).ln() / (2.0 * z);
    let centre = (lo * hi).sqrt();
    assert!((centre - 1.19).abs() <= 0.01);
    let (a, b) = confidence_interval(centre, se, Scale::Ratio, 0.95).unwrap();
    assert!((a - lo).abs() < 1e-12 && (b - hi).abs() < 1e-12);
    let (a, b) = confidence_interval(1.19, se, Scale::Ratio, 0.95).unwrap();
    assert!((a - lo).abs() < 0.01 && (b - hi).abs() < 0.01, "({a}, {b})");
}

#[test]
fn study_standard_errors_track_sampling_spread() {
    for name in ["scenario1", "scenario2"] {
        let cfg = ScenarioConfig::preset(name).unwrap().with_n(600);
        let rep = run_study(
            &cfg,
            200,
            &[OutcomeModel::Mzip, OutcomeModel::Poisson],
            &[SeMethod::DeltaModel],
            &MediationSpec::default(),
            31,
            None,
        )
        .unwrap();
        let row = |m, e| rep.rows.iter().find(|r| r.method == m && r.effect == e).unwrap();
        for e in [EffectKind::Nde, EffectKind::Nie] {
            let r = row(OutcomeModel::Mzip, e);
            let ratio = r.median_se / r.empirical_se.unwrap();
            assert!((ratio - 1.0).abs() < 0.20, "{name} {e:?}: median se {} vs empirical {:?}", r.median_se, r.empirical_se);
        }
        let (p, m) = (row(OutcomeModel::Poisson, EffectKind::Nde), row(OutcomeModel::Mzip, EffectKind::Nde));
        assert!(p.median_se < m.median_se, "{name}: Poisson {} vs MZIP {}", p.median_se, m.median_se);
    }
}

fn nde_pair(seed: u64) -> (f64, f64) {
    let data = generate(&ScenarioConfig::preset("scenario1").unwrap().with_n(5000), seed).unwrap();
    let mzip = mediate(&data, &spec_at_c2()).unwrap().effects.nde.estimate;
    let spec = MediationSpec { outcome_model: OutcomeModel::Poisson, ..spec_at_c2() };
    (mediate(&data, &spec).unwrap().effects.nde.estimate, mzip)
}

#[test]
fn poisson_outcome_overstates_nde() {
    let (poisson, mzip) = nde_pair(21);
    assert!(poisson > mzip, "Poisson NDE {poisson} vs MZIP {mzip}");
}

/// The Poisson fit's upward bias shrinks with n under this generator and is
/// below ten percent at n = 5000.
#[test]
#[ignore = "expected to fail: Poisson NDE exceeds MZIP by about 9% on this dataset"]
fn poisson_outcome_overstates_nde_by_ten_percent() {
    let (poisson, mzip) = nde_pair(21);
    assert!(poisson > 1.10 * mzip, "Poisson NDE {poisson} vs MZIP {mzip}");
}

/// Nominal 95% bootstrap intervals for the indirect effect at n = 600 should
/// cover the truth in roughly 94.6% of outer replications.
#[test]
#[ignore = "500 outer replications of a 1000-resample bootstrap; run with --ignored --release"]
fn bootstrap_nie_coverage_at_n600() {
    let cfg = ScenarioConfig::preset("scenario1").unwrap().with_n(600);
    let spec = MediationSpec { boot_reps: 1000, ..MediationSpec::default() };
    let rep = run_study(&cfg, 500, &[OutcomeModel::Mzip], &[SeMethod::Bootstrap], &spec, 600, None).unwrap();
    let truth = true_effects(&cfg, &MediationSpec { c: Some(vec![2.0]), ..spec }).unwrap();
    let row = rep.rows.iter().find(|r| r.effect == EffectKind::Nie).unwrap();
    assert_eq!(row.truth, truth.nie.estimate);
    assert!((row.coverage - 0.946).abs() <= 0.02, "coverage {}", row.coverage);
}
