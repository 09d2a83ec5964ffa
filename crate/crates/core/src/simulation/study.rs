use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{generate_with_rng, true_effects, ScenarioConfig};
use crate::error::{Error, Result};
use crate::mediation::{
    bootstrap_mediation_data, estimate_effects, fit_models, percentile, EffectKind, EffectSet, MediationSpec,
    OutcomeModel, Scale, SeMethod,
};
use crate::optimizer::OptimSettings;
use crate::parallel::{map_indexed, with_threads};

/// Share of dropped replicates above which a study is abandoned.
pub const MAX_DROP_RATE: f64 = 0.10;

/// Performance of one (outcome model, effect, SE method) combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: OutcomeModel,
    pub effect: EffectKind,
    pub se_method: SeMethod,
    pub truth: f64,
    pub median_estimate: f64,
    /// `100·(median estimate − truth)/truth`.
    pub median_pct_bias: f64,
    pub coverage: f64,
    /// Share of intervals excluding the null value.
    pub power: f64,
    pub median_se: f64,
    /// SD of working-scale estimates; `None` with fewer than two replicates.
    pub empirical_se: Option<f64>,
    pub reps_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub reps: usize,
    pub n: usize,
    pub scale: Scale,
    pub truth: EffectSet,
    pub rows: Vec<ReportRow>,
}

const EFFECTS: [EffectKind; 2] = [EffectKind::Nde, EffectKind::Nie];

/// Monte Carlo study: for every replicate, draw a dataset, fit each outcome
/// model and record effects with intervals for each SE method.
///
/// Replicate `r` draws from a generator seeded by `(seed, r)`, so the report
/// does not depend on `threads`. Failed fits are dropped and counted per
/// (method, SE method).
pub fn run_study(
    config: &ScenarioConfig,
    reps: usize,
    methods: &[OutcomeModel],
    se_methods: &[SeMethod],
    spec: &MediationSpec,
    seed: u64,
    threads: Option<usize>,
) -> Result<SimulationReport> {
    if reps == 0 {
        return Err(Error::InvalidInput("reps must be at least 1".into()));
    }
    if methods.is_empty() || se_methods.is_empty() {
        return Err(Error::InvalidInput("at least one method and one SE method are required".into()));
    }
    let spec = MediationSpec {
        c: Some(spec.c.clone().unwrap_or_else(|| vec![config.c_eval])),
        mediator_type: config.mediator.kind(),
        interaction: config.interaction(),
        ..spec.clone()
    };
    let truth = true_effects(config, &spec)?;
    let settings = OptimSettings::default();

    let per_rep: Vec<Result<Vec<Option<EffectSet>>>> = with_threads(threads, || {
        map_indexed(reps, |r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let data = generate_with_rng(config, &mut rng)?.mediation_data()?;
            let boot_seed = rng.next_u64();
            let mut out = Vec::with_capacity(methods.len() * se_methods.len());
            for &method in methods {
                let mspec = MediationSpec { outcome_model: method, ..spec.clone() };
                let fitted = fit_models(&data, &mspec, &settings).ok();
                for &se_method in se_methods {
                    let sspec = MediationSpec { se_method, ..mspec.clone() };
                    let est = match (&fitted, se_method) {
                        (None, _) => None,
                        (Some(_), SeMethod::Bootstrap) => {
                            bootstrap_mediation_data(&data, &sspec, sspec.boot_reps, boot_seed).ok().map(|b| b.effects)
                        }
                        (Some(f), _) => estimate_effects(f, &sspec).ok(),
                    };
                    out.push(est);
                }
            }
            Ok(out)
        })
    });
    let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        for (si, &se_method) in se_methods.iter().enumerate() {
            let col = mi * se_methods.len() + si;
            let sets: Vec<&EffectSet> = per_rep.iter().filter_map(|r| r[col].as_ref()).collect();
            let failed = reps - sets.len();
            if failed as f64 > MAX_DROP_RATE * reps as f64 {
                return Err(Error::TooManyFailures { failed, total: reps });
            }
            for kind in EFFECTS {
                rows.push(summarize(method, kind, se_method, truth.get(kind).estimate, spec.scale, &sets));
            }
        }
    }
    Ok(SimulationReport { reps, n: config.n, scale: spec.scale, truth, rows })
}

fn summarize(
    method: OutcomeModel,
    effect: EffectKind,
    se_method: SeMethod,
    truth: f64,
    scale: Scale,
    sets: &[&EffectSet],
) -> ReportRow {
    let null = scale.null();
    let k = sets.len() as f64;
    let mut est: Vec<f64> = sets.iter().map(|s| s.get(effect).estimate).collect();
    let mut ses: Vec<f64> = sets.iter().filter_map(|s| s.get(effect).se).collect();
    let cis: Vec<[f64; 2]> = sets.iter().filter_map(|s| s.get(effect).ci).collect();
    let working: Vec<f64> = est
        .iter()
        .map(|e| match scale {
            Scale::Ratio => e.ln(),
            Scale::Difference => *e,
        })
        .collect();
    est.sort_by(f64::total_cmp);
    ses.sort_by(f64::total_cmp);
    let median_estimate = percentile(&est, 0.5);
    let coverage = cis.iter().filter(|c| c[0] <= truth && truth <= c[1]).count() as f64 / k;
    let power = cis.iter().filter(|c| c[0] > null || c[1] < null).count() as f64 / k;
    let empirical_se = (working.len() >= 2).then(|| crate::mediation::sample_sd(&working));
    ReportRow {
        method,
        effect,
        se_method,
        truth,
        median_estimate,
        median_pct_bias: 100.0 * (median_estimate - truth) / truth,
        coverage,
        power,
        median_se: percentile(&ses, 0.5),
        empirical_se,
        reps_used: sets.len(),
    }
}
