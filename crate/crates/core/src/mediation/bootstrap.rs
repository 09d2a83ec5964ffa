use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::effects::estimate_effects;
use super::interval::percentile;
use super::{Effect, EffectSet, MediationSpec, Scale, SeMethod};
use crate::data::{Dataset, MediationData};
use crate::error::{Error, Result};
use crate::optimizer::OptimSettings;
use crate::parallel::map_indexed;

/// Share of failed replicates above which the bootstrap is abandoned.
pub const MAX_FAILURE_RATE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOutcome {
    /// Full-data point estimates with bootstrap SEs and percentile intervals.
    pub effects: EffectSet,
    pub used: usize,
    pub failed: usize,
    /// Working-scale replicate values `[nde, nie, cde, te]` of the successful replicates.
    pub replicates: Vec<[f64; 4]>,
}

/// Nonparametric bootstrap of all effects. Covariates are evaluated at
/// `spec.c` or, when unset, the full-sample means.
pub fn bootstrap_effects(data: &Dataset, spec: &MediationSpec, b: usize, seed: u64) -> Result<BootstrapOutcome> {
    bootstrap_mediation_data(&data.mediation_data()?, spec, b, seed)
}

/// [`bootstrap_effects`] on model-ready arrays.
pub fn bootstrap_mediation_data(
    data: &MediationData,
    spec: &MediationSpec,
    b: usize,
    seed: u64,
) -> Result<BootstrapOutcome> {
    spec.validate()?;
    if b < 2 {
        return Err(Error::InvalidInput(format!("bootstrap needs at least 2 replicates, got {b}")));
    }
    let spec = MediationSpec {
        c: Some(spec.c.clone().unwrap_or_else(|| data.covariate_means())),
        se_method: SeMethod::Bootstrap,
        ..spec.clone()
    };
    let settings = OptimSettings::default();
    let fitted = super::fit_models(data, &spec, &settings)?;
    let mut effects = estimate_effects(&fitted, &spec)?;

    let n = data.n();
    let draws = map_indexed(b, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let sample = data.resample(&idx);
        super::fit_models(&sample, &spec, &settings)
            .and_then(|f| estimate_effects(&f, &spec))
            .ok()
            .map(|e| working(&e))
            .filter(|w| w.iter().all(|v| v.is_finite()))
    });
    let replicates: Vec<[f64; 4]> = draws.into_iter().flatten().collect();
    let failed = b - replicates.len();
    if failed as f64 > MAX_FAILURE_RATE * b as f64 {
        return Err(Error::TooManyFailures { failed, total: b });
    }

    let alpha = 1.0 - spec.level;
    for (k, effect) in [&mut effects.nde, &mut effects.nie, &mut effects.cde, &mut effects.te]
        .into_iter()
        .enumerate()
    {
        let mut vals: Vec<f64> = replicates.iter().map(|r| r[k]).collect();
        vals.sort_by(f64::total_cmp);
        let (lo, hi) = (percentile(&vals, alpha / 2.0), percentile(&vals, 1.0 - alpha / 2.0));
        effect.se = Some(sample_sd(&vals));
        effect.ci = Some(match spec.scale {
            Scale::Ratio => [lo.exp(), hi.exp()],
            Scale::Difference => [lo, hi],
        });
    }
    Ok(BootstrapOutcome { effects, used: replicates.len(), failed, replicates })
}

fn working(e: &EffectSet) -> [f64; 4] {
    let f = |x: &Effect| match e.scale {
        Scale::Ratio => x.estimate.ln(),
        Scale::Difference => x.estimate,
    };
    [f(&e.nde), f(&e.nie), f(&e.cde), f(&e.te)]
}

/// Sample standard deviation with the `n − 1` denominator.
pub(crate) fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}
