use statrs::distribution::{ContinuousCDF, Normal};

use super::{EffectSet, Scale};
use crate::error::{Error, Result};

/// Standard-normal quantile at `(1 + level) / 2`.
pub fn z_value(level: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 * (1.0 + level))
}

/// Wald interval: `exp(log est ± z·se)` on the ratio scale, `est ± z·se` on
/// the difference scale.
pub fn confidence_interval(estimate: f64, se: f64, scale: Scale, level: f64) -> Result<(f64, f64)> {
    if se.is_nan() || se < 0.0 {
        return Err(Error::InvalidInput(format!("standard error must be non-negative, got {se}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!("level must lie in (0, 1), got {level}")));
    }
    let half = z_value(level) * se;
    match scale {
        Scale::Ratio => {
            if estimate.is_nan() || estimate <= 0.0 {
                return Err(Error::NonPositiveEstimate(estimate));
            }
            if se == 0.0 {
                return Ok((estimate, estimate));
            }
            let l = estimate.ln();
            Ok(((l - half).exp(), (l + half).exp()))
        }
        Scale::Difference => Ok((estimate - half, estimate + half)),
    }
}

/// Share of the total effect running through the mediator.
///
/// Difference scale: NIE / TE. Ratio scale: NDE·(NIE − 1) / (NDE·NIE − 1).
/// Values outside [0, 1] are returned as is.
pub fn proportion_mediated(effects: &EffectSet) -> Result<f64> {
    let (nde, nie) = (effects.nde.estimate, effects.nie.estimate);
    let (num, den) = match effects.scale {
        Scale::Ratio => (nde * (nie - 1.0), nde * nie - 1.0),
        Scale::Difference => (nie, nde + nie),
    };
    if den == 0.0 || !den.is_finite() {
        return Err(Error::NullTotalEffect);
    }
    Ok(num / den)
}

/// Linear-interpolation quantile of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}
