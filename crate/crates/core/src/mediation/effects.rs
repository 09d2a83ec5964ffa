use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::interval::{confidence_interval, proportion_mediated};
use super::params::{effect_gradients, effect_values, Contrast, EffectValues, ParamLayout};
use super::{Effect, EffectSet, FittedModels, MediationSpec, MediatorFit, MediatorType, OutcomeFit, Scale, SeMethod};
use crate::error::{Error, Result};
use crate::glm::{GlmFit, LinearFit};
use crate::linalg::{block_diag, quad_form};

/// Delta-method standard errors on the working scale (log-IRR or mean difference).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSe {
    pub nde: f64,
    pub nie: f64,
    pub cde: f64,
    pub te: f64,
}

#[derive(Clone, Copy)]
enum MediatorRef<'a> {
    Linear(&'a LinearFit),
    Logistic(&'a GlmFit),
}

impl MediatorRef<'_> {
    fn kind(&self) -> MediatorType {
        match self {
            MediatorRef::Linear(_) => MediatorType::Continuous,
            MediatorRef::Logistic(_) => MediatorType::Binary,
        }
    }

    fn theta(&self) -> &DVector<f64> {
        match self {
            MediatorRef::Linear(f) => &f.theta,
            MediatorRef::Logistic(f) => &f.coefficients,
        }
    }
}

struct Problem {
    layout: ParamLayout,
    params: DVector<f64>,
    contrast: Contrast,
}

fn problem(outcome: &OutcomeFit, mediator: &MediatorRef<'_>, spec: &MediationSpec) -> Result<Problem> {
    spec.validate()?;
    if !outcome.converged() {
        return Err(Error::NotConverged);
    }
    if let MediatorRef::Logistic(f) = mediator {
        if !f.converged {
            return Err(Error::NotConverged);
        }
    }
    let theta = mediator.theta();
    if theta.len() < 2 {
        return Err(Error::SpecMismatch("mediator model needs an intercept and an exposure term".into()));
    }
    let n_cov = theta.len() - 2;
    let layout = ParamLayout { n_cov, interaction: spec.interaction, mediator: mediator.kind() };
    let sigma2 = match mediator {
        MediatorRef::Linear(f) => Some(f.sigma2),
        MediatorRef::Logistic(_) => None,
    };
    let params = layout.pack(theta.as_slice(), outcome.alpha().as_slice(), sigma2)?;
    let c = spec.covariates_or(n_cov)?;
    let contrast = Contrast { x: spec.x, x_star: spec.x_star, c, m_cde: spec.m_cde };
    Ok(Problem { layout, params, contrast })
}

fn covariance(outcome: &OutcomeFit, mediator: &MediatorRef<'_>, robust: bool) -> Result<DMatrix<f64>> {
    let sigma_alpha = outcome.alpha_cov(robust);
    let sigma = match mediator {
        MediatorRef::Linear(f) => {
            let var_s2 = DMatrix::from_element(1, 1, f.sigma2_var);
            block_diag(&[&f.cov_theta, &sigma_alpha, &var_s2])
        }
        MediatorRef::Logistic(f) => block_diag(&[&f.cov_model, &sigma_alpha]),
    };
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    Ok(sigma)
}

fn to_effect_set(v: EffectValues, scale: Scale) -> EffectSet {
    let (nde, nie, cde, te) = match scale {
        Scale::Ratio => {
            let (nde, nie) = (v.nde.exp(), v.nie.exp());
            (nde, nie, v.cde.exp(), nde * nie)
        }
        Scale::Difference => (v.nde, v.nie, v.cde, v.nde + v.nie),
    };
    let mut set = EffectSet {
        nde: Effect::point(nde),
        nie: Effect::point(nie),
        cde: Effect::point(cde),
        te: Effect::point(te),
        pm: None,
        scale,
    };
    set.pm = proportion_mediated(&set).ok();
    set
}

/// Point effects at a given flat parameter vector, with TE and PM filled in.
pub fn effects_at(layout: ParamLayout, params: &DVector<f64>, contrast: &Contrast, scale: Scale) -> Result<EffectSet> {
    Ok(to_effect_set(effect_values(layout, params, contrast, scale)?, scale))
}

fn point_effects(outcome: &OutcomeFit, mediator: MediatorRef<'_>, spec: &MediationSpec) -> Result<EffectSet> {
    let p = problem(outcome, &mediator, spec)?;
    let v = effect_values(p.layout, &p.params, &p.contrast, spec.scale)?;
    let set = to_effect_set(v, spec.scale);
    for e in [set.nde, set.nie, set.cde, set.te] {
        if !e.estimate.is_finite() {
            return Err(Error::NonFinite("effect estimate".into()));
        }
    }
    Ok(set)
}

fn delta_se(outcome: &OutcomeFit, mediator: MediatorRef<'_>, spec: &MediationSpec, robust: bool) -> Result<DeltaSe> {
    let p = problem(outcome, &mediator, spec)?;
    let sigma = covariance(outcome, &mediator, robust)?;
    let g = effect_gradients(p.layout, &p.params, &p.contrast, spec.scale)?;
    let se = |grad: &DVector<f64>| -> Result<f64> {
        let q = quad_form(grad, &sigma);
        let tol = 1e-12 * (1.0 + grad.norm_squared() * sigma.amax());
        if !q.is_finite() || q < -tol {
            return Err(Error::SingularCovariance);
        }
        Ok(q.max(0.0).sqrt())
    };
    Ok(DeltaSe { nde: se(&g.nde)?, nie: se(&g.nie)?, cde: se(&g.cde)?, te: se(&g.te)? })
}

/// Point estimates for a continuous (linear) mediator.
pub fn effects_continuous(outcome: &OutcomeFit, mediator: &LinearFit, spec: &MediationSpec) -> Result<EffectSet> {
    point_effects(outcome, MediatorRef::Linear(mediator), spec)
}

/// Point estimates for a binary (logistic) mediator.
pub fn effects_binary(outcome: &OutcomeFit, mediator: &GlmFit, spec: &MediationSpec) -> Result<EffectSet> {
    point_effects(outcome, MediatorRef::Logistic(mediator), spec)
}

/// Delta-method standard errors for a continuous mediator. `robust` swaps the
/// outcome-model covariance for its sandwich form.
pub fn delta_se_continuous(
    outcome: &OutcomeFit,
    mediator: &LinearFit,
    spec: &MediationSpec,
    robust: bool,
) -> Result<DeltaSe> {
    delta_se(outcome, MediatorRef::Linear(mediator), spec, robust)
}

/// Delta-method standard errors for a binary mediator.
pub fn delta_se_binary(outcome: &OutcomeFit, mediator: &GlmFit, spec: &MediationSpec, robust: bool) -> Result<DeltaSe> {
    delta_se(outcome, MediatorRef::Logistic(mediator), spec, robust)
}

fn attach(effect: &mut Effect, se: f64, scale: Scale, level: f64) -> Result<()> {
    let (lo, hi) = confidence_interval(effect.estimate, se, scale, level)?;
    effect.se = Some(se);
    effect.ci = Some([lo, hi]);
    Ok(())
}

/// Point estimates plus delta-method intervals when `spec.se_method` asks for
/// them. Bootstrap intervals need the data and come from
/// [`super::bootstrap_effects`].
pub fn estimate_effects(fitted: &FittedModels, spec: &MediationSpec) -> Result<EffectSet> {
    let mref = match &fitted.mediator {
        MediatorFit::Linear(f) => MediatorRef::Linear(f),
        MediatorFit::Logistic(f) => MediatorRef::Logistic(f),
    };
    if mref.kind() != spec.mediator_type {
        return Err(Error::SpecMismatch("fitted mediator model does not match the mediator type".into()));
    }
    let robust = match spec.se_method {
        SeMethod::DeltaModel => false,
        SeMethod::DeltaRobust => true,
        SeMethod::Bootstrap => return point_effects(&fitted.outcome, mref, spec),
    };
    let mut set = point_effects(&fitted.outcome, mref, spec)?;
    let se = delta_se(&fitted.outcome, mref, spec, robust)?;
    attach(&mut set.nde, se.nde, spec.scale, spec.level)?;
    attach(&mut set.nie, se.nie, spec.scale, spec.level)?;
    attach(&mut set.cde, se.cde, spec.scale, spec.level)?;
    attach(&mut set.te, se.te, spec.scale, spec.level)?;
    Ok(set)
}
