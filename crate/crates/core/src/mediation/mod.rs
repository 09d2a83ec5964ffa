//! Counterfactual mediation effects with an MZIP (or Poisson) outcome model.
//!
//! Natural direct, natural indirect, controlled direct and total effects are
//! available on the incidence-rate-ratio scale and the mean-difference scale,
//! for continuous (linear) and binary (logistic) mediators, with or without an
//! exposure–mediator interaction. Uncertainty comes from the delta method
//! (model-based or sandwich outcome covariance) or the nonparametric bootstrap.
//!
//! Standard errors of ratio-scale effects are reported for the log-IRR.

mod bootstrap;
mod effects;
mod interval;
pub mod params;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap_effects, bootstrap_mediation_data, BootstrapOutcome};
pub use effects::{
    delta_se_binary, delta_se_continuous, effects_at, effects_binary, effects_continuous, estimate_effects,
    DeltaSe,
};
pub use interval::{confidence_interval, percentile, proportion_mediated, z_value};
pub(crate) use bootstrap::sample_sd;

use crate::data::{Dataset, MediationData};
use crate::error::{Error, Result};
use crate::glm::{fit_linear, fit_logistic, fit_poisson, GlmFit, LinearFit};
use crate::mzip::{mzip_fit, MzipFit};
use crate::optimizer::OptimSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediatorType {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Ratio,
    Difference,
}

impl Scale {
    /// Effect value meaning "no effect".
    pub fn null(self) -> f64 {
        match self {
            Scale::Ratio => 1.0,
            Scale::Difference => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeMethod {
    DeltaModel,
    DeltaRobust,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeModel {
    Mzip,
    Poisson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediationSpec {
    /// Treated exposure level.
    pub x: f64,
    /// Reference exposure level.
    pub x_star: f64,
    /// Covariate evaluation point; `None` means the sample means.
    pub c: Option<Vec<f64>>,
    /// Mediator level for the controlled direct effect.
    pub m_cde: f64,
    pub mediator_type: MediatorType,
    pub scale: Scale,
    pub interaction: bool,
    pub se_method: SeMethod,
    pub level: f64,
    pub outcome_model: OutcomeModel,
    pub boot_reps: usize,
    pub seed: u64,
}

impl Default for MediationSpec {
    fn default() -> Self {
        Self {
            x: 1.0,
            x_star: 0.0,
            c: None,
            m_cde: 0.0,
            mediator_type: MediatorType::Continuous,
            scale: Scale::Ratio,
            interaction: false,
            se_method: SeMethod::DeltaModel,
            level: 0.95,
            outcome_model: OutcomeModel::Mzip,
            boot_reps: 1000,
            seed: 0,
        }
    }
}

impl MediationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidInput(format!("level must lie in (0, 1), got {}", self.level)));
        }
        if !(self.x.is_finite() && self.x_star.is_finite() && self.m_cde.is_finite()) {
            return Err(Error::InvalidInput("exposure levels and m_cde must be finite".into()));
        }
        if let Some(c) = &self.c {
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("covariate values must be finite".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn covariates_or(&self, n_cov: usize) -> Result<Vec<f64>> {
        match &self.c {
            Some(c) if c.len() == n_cov => Ok(c.clone()),
            Some(c) => Err(Error::SpecMismatch(format!(
                "covariate vector has length {}, models have {n_cov} covariates",
                c.len()
            ))),
            None if n_cov == 0 => Ok(Vec::new()),
            None => Err(Error::SpecMismatch("covariate evaluation vector not set".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub estimate: f64,
    /// Log-IRR standard error on the ratio scale.
    pub se: Option<f64>,
    pub ci: Option<[f64; 2]>,
}

impl Effect {
    pub fn point(estimate: f64) -> Self {
        Self { estimate, se: None, ci: None }
    }

    pub fn ci_low(&self) -> Option<f64> {
        self.ci.map(|c| c[0])
    }

    pub fn ci_high(&self) -> Option<f64> {
        self.ci.map(|c| c[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSet {
    pub nde: Effect,
    pub nie: Effect,
    pub cde: Effect,
    pub te: Effect,
    /// Proportion mediated; `None` when the total effect is null.
    pub pm: Option<f64>,
    pub scale: Scale,
}

impl EffectSet {
    pub fn get(&self, which: EffectKind) -> &Effect {
        match which {
            EffectKind::Nde => &self.nde,
            EffectKind::Nie => &self.nie,
            EffectKind::Cde => &self.cde,
            EffectKind::Te => &self.te,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EffectKind {
    Nde,
    Nie,
    Cde,
    Te,
}

/// A fitted outcome model.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeFit {
    Mzip(MzipFit),
    Poisson(GlmFit),
}

impl OutcomeFit {
    /// Coefficients on the overall mean (α for MZIP, the log-linear coefficients for Poisson).
    pub fn alpha(&self) -> &DVector<f64> {
        match self {
            OutcomeFit::Mzip(f) => &f.alpha,
            OutcomeFit::Poisson(f) => &f.coefficients,
        }
    }

    pub fn alpha_cov(&self, robust: bool) -> DMatrix<f64> {
        match self {
            OutcomeFit::Mzip(f) => f.alpha_cov(robust),
            OutcomeFit::Poisson(f) if robust => f.cov_robust.clone(),
            OutcomeFit::Poisson(f) => f.cov_model.clone(),
        }
    }

    pub fn converged(&self) -> bool {
        match self {
            OutcomeFit::Mzip(f) => f.converged,
            OutcomeFit::Poisson(f) => f.converged,
        }
    }

    pub fn loglik(&self) -> f64 {
        match self {
            OutcomeFit::Mzip(f) => f.loglik,
            OutcomeFit::Poisson(f) => f.loglik,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            OutcomeFit::Mzip(f) => f.iterations,
            OutcomeFit::Poisson(f) => f.iterations,
        }
    }

    pub fn model(&self) -> OutcomeModel {
        match self {
            OutcomeFit::Mzip(_) => OutcomeModel::Mzip,
            OutcomeFit::Poisson(_) => OutcomeModel::Poisson,
        }
    }
}

/// A fitted mediator model.
#[derive(Debug, Clone, PartialEq)]
pub enum MediatorFit {
    Linear(LinearFit),
    Logistic(GlmFit),
}

impl MediatorFit {
    pub fn theta(&self) -> &DVector<f64> {
        match self {
            MediatorFit::Linear(f) => &f.theta,
            MediatorFit::Logistic(f) => &f.coefficients,
        }
    }

    pub fn converged(&self) -> bool {
        match self {
            MediatorFit::Linear(_) => true,
            MediatorFit::Logistic(f) => f.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModels {
    pub mediator: MediatorFit,
    pub outcome: OutcomeFit,
}

/// Fits the mediator and outcome models requested by `spec`.
pub fn fit_models(data: &MediationData, spec: &MediationSpec, settings: &OptimSettings) -> Result<FittedModels> {
    let med_design = data.mediator_design();
    let m = data.mediator();
    let mediator = match spec.mediator_type {
        MediatorType::Continuous => MediatorFit::Linear(fit_linear(&med_design, &m)?),
        MediatorType::Binary => MediatorFit::Logistic(fit_logistic(&med_design, &m)?),
    };
    let out_design = data.outcome_design(spec.interaction);
    let y = data.outcome();
    let outcome = match spec.outcome_model {
        OutcomeModel::Mzip => OutcomeFit::Mzip(mzip_fit(&out_design, &y, settings)?),
        OutcomeModel::Poisson => OutcomeFit::Poisson(fit_poisson(&out_design, &y)?),
    };
    Ok(FittedModels { mediator, outcome })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub model: String,
    pub labels: Vec<String>,
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub loglik: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MediationResult {
    pub effects: EffectSet,
    pub se_method: SeMethod,
    /// Covariate values the effects were evaluated at.
    pub c: Vec<f64>,
    pub outcome: ModelSummary,
    pub mediator: ModelSummary,
    pub bootstrap: Option<BootstrapSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BootstrapSummary {
    pub requested: usize,
    pub used: usize,
    pub failed: usize,
}

/// Fits both models on `data` and returns the effect set requested by `spec`.
pub fn mediate(data: &Dataset, spec: &MediationSpec) -> Result<MediationResult> {
    spec.validate()?;
    let md = data.mediation_data()?;
    let c = spec.c.clone().unwrap_or_else(|| md.covariate_means());
    let spec = MediationSpec { c: Some(c.clone()), ..spec.clone() };
    let settings = OptimSettings::default();
    let fitted = fit_models(&md, &spec, &settings)?;

    let (effects, bootstrap) = match spec.se_method {
        SeMethod::Bootstrap => {
            let b = bootstrap_mediation_data(&md, &spec, spec.boot_reps, spec.seed)?;
            let summary = BootstrapSummary { requested: spec.boot_reps, used: b.used, failed: b.failed };
            (b.effects, Some(summary))
        }
        _ => (estimate_effects(&fitted, &spec)?, None),
    };

    let roles = data.roles();
    let outcome = ModelSummary {
        model: match spec.outcome_model {
            OutcomeModel::Mzip => "mzip".into(),
            OutcomeModel::Poisson => "poisson".into(),
        },
        labels: MediationData::outcome_labels(roles, spec.interaction),
        coefficients: fitted.outcome.alpha().iter().copied().collect(),
        converged: fitted.outcome.converged(),
        iterations: Some(fitted.outcome.iterations()),
        loglik: Some(fitted.outcome.loglik()),
    };
    let mut med_labels = vec!["(intercept)".to_string(), roles.exposure.clone()];
    med_labels.extend(roles.covariates.iter().cloned());
    let mediator = ModelSummary {
        model: match spec.mediator_type {
            MediatorType::Continuous => "linear".into(),
            MediatorType::Binary => "logistic".into(),
        },
        labels: med_labels,
        coefficients: fitted.mediator.theta().iter().copied().collect(),
        converged: fitted.mediator.converged(),
        iterations: match &fitted.mediator {
            MediatorFit::Linear(_) => None,
            MediatorFit::Logistic(f) => Some(f.iterations),
        },
        loglik: match &fitted.mediator {
            MediatorFit::Linear(_) => None,
            MediatorFit::Logistic(f) => Some(f.loglik),
        },
    };
    Ok(MediationResult { effects, se_method: spec.se_method, c, outcome, mediator, bootstrap })
}
