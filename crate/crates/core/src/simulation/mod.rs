//! Data generators for zero-inflated count mediation scenarios, true-effect
//! calculators and a Monte Carlo study runner.

mod study;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Exp, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

pub use study::{run_study, ReportRow, SimulationReport, MAX_DROP_RATE};

use crate::data::{Dataset, Roles};
use crate::error::{Error, Result};
use crate::mediation::params::{Contrast, ParamLayout};
use crate::mediation::{effects_at, EffectSet, MediationSpec, MediatorType};
use crate::special::{logistic, softplus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MediatorConfig {
    /// `M ~ Normal(θ₀ + θ₁x + θ₄c, σ²)`.
    Continuous { theta: Vec<f64>, sigma2: f64 },
    /// `M ~ Bernoulli(logistic(θ₀ + θ₁x + θ₄c))`.
    Binary { theta: Vec<f64> },
}

impl MediatorConfig {
    pub fn theta(&self) -> &[f64] {
        match self {
            MediatorConfig::Continuous { theta, .. } | MediatorConfig::Binary { theta } => theta,
        }
    }

    pub fn kind(&self) -> MediatorType {
        match self {
            MediatorConfig::Continuous { .. } => MediatorType::Continuous,
            MediatorConfig::Binary { .. } => MediatorType::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OutcomeFamily {
    /// Zero-inflated Poisson.
    Zip,
    /// Zero-inflated negative binomial with `Var = μ + μ²/ω` for the count part.
    Zinb { omega: f64 },
}

/// Data-generating parameters for one simulation scenario.
///
/// `gamma` and `alpha` hold `(intercept, x, m, c)` or, with an
/// exposure–mediator interaction, `(intercept, x, m, x·m, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub mediator: MediatorConfig,
    pub outcome_family: OutcomeFamily,
    pub n: usize,
    /// Covariate value for conditional truths.
    #[serde(default = "default_c_eval")]
    pub c_eval: f64,
}

fn default_c_eval() -> f64 {
    2.0
}

/// Names accepted by [`ScenarioConfig::preset`].
pub const PRESET_NAMES: [&str; 9] = [
    "scenario1",
    "scenario2",
    "scenario3",
    "scenario4",
    "scenario5",
    "binary1",
    "binary2",
    "binary3",
    "overdispersed",
];

impl ScenarioConfig {
    /// Built-in parameter set by name, with `n = 1000`.
    pub fn preset(name: &str) -> Option<Self> {
        let linear = MediatorConfig::Continuous { theta: vec![0.0, 1.0, 0.5], sigma2: 3.0 };
        let binary = MediatorConfig::Binary { theta: vec![0.0, 2.0, 0.25] };
        let (gamma, alpha, mediator, family) = match name {
            "scenario1" => ([0.35, -1.5, 0.0, 0.25], [-0.6, 0.41, 0.15, 0.25], linear, OutcomeFamily::Zip),
            "scenario2" => ([0.35, -1.5, 0.25, 0.25], [-0.6, 0.41, 0.15, 0.25], linear, OutcomeFamily::Zip),
            "scenario3" => ([0.35, -0.45, 0.0, 0.25], [-0.6, 0.41, 0.15, 0.25], linear, OutcomeFamily::Zip),
            "scenario4" => ([0.35, -1.5, 0.0, 0.25], [0.4, 0.41, 0.15, 0.25], linear, OutcomeFamily::Zip),
            "scenario5" => ([0.35, -1.5, 0.25, 0.25], [0.4, 0.41, 0.15, 0.25], linear, OutcomeFamily::Zip),
            "binary1" => ([0.35, -1.5, 0.0, 0.25], [-0.6, 0.41, 0.6, 0.25], binary, OutcomeFamily::Zip),
            "binary2" => ([0.35, -1.5, 1.5, 0.25], [-0.6, 0.41, 0.6, 0.25], binary, OutcomeFamily::Zip),
            "binary3" => ([0.35, -1.5, 1.5, 0.25], [0.4, 0.41, 0.6, 0.25], binary, OutcomeFamily::Zip),
            "overdispersed" => (
                [0.35, -1.5, 0.25, 0.25],
                [-0.6, 0.41, 0.15, 0.25],
                linear,
                OutcomeFamily::Zinb { omega: 2.0 },
            ),
            _ => return None,
        };
        Some(Self {
            gamma: gamma.to_vec(),
            alpha: alpha.to_vec(),
            mediator,
            outcome_family: family,
            n: 1000,
            c_eval: 2.0,
        })
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn interaction(&self) -> bool {
        self.alpha.len() == 5
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !matches!(self.alpha.len(), 4 | 5) || self.gamma.len() != self.alpha.len() {
            return bad(format!(
                "gamma and alpha must both have 4 or 5 entries, got {} and {}",
                self.gamma.len(),
                self.alpha.len()
            ));
        }
        if self.mediator.theta().len() != 3 {
            return bad(format!("theta must have 3 entries, got {}", self.mediator.theta().len()));
        }
        let all = self.gamma.iter().chain(&self.alpha).chain(self.mediator.theta()).chain([&self.c_eval]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return bad("scenario parameters must be finite".into());
        }
        if let MediatorConfig::Continuous { sigma2, .. } = self.mediator {
            if !(sigma2 > 0.0 && sigma2.is_finite()) {
                return bad(format!("sigma2 must be positive, got {sigma2}"));
            }
        }
        if let OutcomeFamily::Zinb { omega } = self.outcome_family {
            if omega.is_nan() || omega <= 0.0 {
                return bad(format!("omega must be positive, got {omega}"));
            }
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        Ok(())
    }

    /// Linear predictor of a `(intercept, x, m, [x·m], c)` coefficient vector.
    fn lp(&self, coef: &[f64], x: f64, m: f64, c: f64) -> f64 {
        if self.interaction() {
            coef[0] + coef[1] * x + coef[2] * m + coef[3] * x * m + coef[4] * c
        } else {
            coef[0] + coef[1] * x + coef[2] * m + coef[3] * c
        }
    }

    /// Excess-zero probability, overall mean and latent count mean at one point.
    pub fn outcome_means(&self, x: f64, m: f64, c: f64) -> (f64, f64, f64) {
        let eg = self.lp(&self.gamma, x, m, c);
        let ea = self.lp(&self.alpha, x, m, c);
        (logistic(eg), ea.exp(), (ea + softplus(eg)).exp())
    }
}

/// Draws one dataset with columns `y, x, m, c`.
pub fn generate(config: &ScenarioConfig, seed: u64) -> Result<Dataset> {
    generate_with_rng(config, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn generate_with_rng<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Dataset> {
    config.validate()?;
    let n = config.n;
    let theta = config.mediator.theta();
    let coin = Bernoulli::new(0.5).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let chi2 = Exp::new(0.5).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let (mut y, mut xs, mut ms, mut cs) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let x = f64::from(u8::from(coin.sample(rng)));
        let c = chi2.sample(rng);
        let eta = theta[0] + theta[1] * x + theta[2] * c;
        let m = match config.mediator {
            MediatorConfig::Continuous { sigma2, .. } => {
                Normal::new(eta, sigma2.sqrt()).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(rng)
            }
            MediatorConfig::Binary { .. } => f64::from(u8::from(rng.random_bool(logistic(eta)))),
        };
        y.push(draw_outcome(config, x, m, c, rng)?);
        xs.push(x);
        ms.push(m);
        cs.push(c);
    }
    let roles =
        Roles { outcome: "y".into(), exposure: "x".into(), mediator: "m".into(), covariates: vec!["c".into()] };
    Dataset::new(vec!["y".into(), "x".into(), "m".into(), "c".into()], vec![y, xs, ms, cs], roles)
}

/// One outcome draw at fixed `(x, m, c)`: an excess zero with probability ψ,
/// otherwise a Poisson or negative-binomial count with mean μ.
pub fn draw_outcome<R: Rng + ?Sized>(config: &ScenarioConfig, x: f64, m: f64, c: f64, rng: &mut R) -> Result<f64> {
    let (psi, _, mu) = config.outcome_means(x, m, c);
    let excess = rng.random_bool(psi);
    let count = draw_count(config.outcome_family, mu, rng)?;
    Ok(if excess { 0.0 } else { count })
}

fn draw_count<R: Rng + ?Sized>(family: OutcomeFamily, mu: f64, rng: &mut R) -> Result<f64> {
    let lambda = match family {
        OutcomeFamily::Zip => mu,
        OutcomeFamily::Zinb { omega } => {
            Gamma::new(omega, mu / omega).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(rng)
        }
    };
    if lambda <= 0.0 {
        return Ok(0.0);
    }
    if !lambda.is_finite() {
        return Err(Error::NonFinite(format!("count mean {lambda}")));
    }
    Ok(Poisson::new(lambda).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(rng))
}

/// Share of zero outcomes in the `x = 0` and `x = 1` arms.
pub fn zero_fractions(data: &Dataset) -> Result<(f64, f64)> {
    let y = data.column(&data.roles().outcome)?;
    let x = data.column(&data.roles().exposure)?;
    let mut counts = [[0usize; 2]; 2];
    for (yi, xi) in y.iter().zip(x) {
        let arm = usize::from(*xi != 0.0);
        counts[arm][0] += usize::from(*yi == 0.0);
        counts[arm][1] += 1;
    }
    let frac = |k: [usize; 2]| if k[1] == 0 { f64::NAN } else { k[0] as f64 / k[1] as f64 };
    Ok((frac(counts[0]), frac(counts[1])))
}

/// Effects implied by the scenario parameters, through the same formulas used
/// for estimation. `spec.c` overrides `config.c_eval`.
pub fn true_effects(config: &ScenarioConfig, spec: &MediationSpec) -> Result<EffectSet> {
    config.validate()?;
    spec.validate()?;
    if spec.mediator_type != config.mediator.kind() {
        return Err(Error::SpecMismatch("spec mediator type differs from the scenario".into()));
    }
    if spec.interaction != config.interaction() {
        return Err(Error::SpecMismatch("spec interaction flag differs from the scenario".into()));
    }
    let layout = ParamLayout { n_cov: 1, interaction: config.interaction(), mediator: config.mediator.kind() };
    let sigma2 = match config.mediator {
        MediatorConfig::Continuous { sigma2, .. } => Some(sigma2),
        MediatorConfig::Binary { .. } => None,
    };
    let params = layout.pack(config.mediator.theta(), &config.alpha, sigma2)?;
    let c = match &spec.c {
        Some(c) if c.len() == 1 => c.clone(),
        Some(c) => {
            return Err(Error::SpecMismatch(format!("scenarios have one covariate, spec gives {}", c.len())))
        }
        None => vec![config.c_eval],
    };
    let contrast = Contrast { x: spec.x, x_star: spec.x_star, c, m_cde: spec.m_cde };
    effects_at(layout, &params, &contrast, spec.scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mediation::Scale;

    fn spec(mediator_type: MediatorType, scale: Scale) -> MediationSpec {
        MediationSpec { mediator_type, scale, ..Default::default() }
    }

    #[test]
    fn all_presets_are_valid() {
        for name in PRESET_NAMES {
            ScenarioConfig::preset(name).unwrap().validate().unwrap();
        }
        assert!(ScenarioConfig::preset("nope").is_none());
    }

    #[test]
    fn same_seed_same_data() {
        let cfg = ScenarioConfig::preset("scenario1").unwrap().with_n(200);
        assert_eq!(generate(&cfg, 5).unwrap(), generate(&cfg, 5).unwrap());
        assert_ne!(generate(&cfg, 5).unwrap(), generate(&cfg, 6).unwrap());
    }

    #[test]
    fn scenario_one_ratio_truth() {
        let cfg = ScenarioConfig::preset("scenario1").unwrap();
        let e = true_effects(&cfg, &spec(MediatorType::Continuous, Scale::Ratio)).unwrap();
        assert!((e.nde.estimate - 1.5068).abs() < 1e-4);
        assert!((e.nie.estimate - 1.1618).abs() < 1e-4);
    }

    #[test]
    fn binary_one_difference_truth() {
        let cfg = ScenarioConfig::preset("binary1").unwrap();
        let e = true_effects(&cfg, &spec(MediatorType::Binary, Scale::Difference)).unwrap();
        assert!((e.nde.estimate - 0.6933).abs() < 1e-4);
        assert!((e.nie.estimate - 0.3381).abs() < 1e-4);
    }

    #[test]
    fn mismatched_spec_is_rejected() {
        let cfg = ScenarioConfig::preset("binary1").unwrap();
        assert!(matches!(
            true_effects(&cfg, &spec(MediatorType::Continuous, Scale::Ratio)),
            Err(Error::SpecMismatch(_))
        ));
    }

    #[test]
    fn binary_mediator_is_zero_one() {
        let cfg = ScenarioConfig::preset("binary2").unwrap().with_n(300);
        let d = generate(&cfg, 1).unwrap();
        assert!(d.column("m").unwrap().iter().all(|m| *m == 0.0 || *m == 1.0));
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = ScenarioConfig::preset("scenario1").unwrap();
        cfg.alpha.pop();
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::preset("overdispersed").unwrap();
        cfg.outcome_family = OutcomeFamily::Zinb { omega: 0.0 };
        assert!(cfg.validate().is_err());
    }
}
