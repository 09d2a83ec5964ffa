//! Mediation effects as functions of one flat parameter vector, and their
//! exact gradients for delta-method propagation.
//!
//! The flat vector is ordered `(θ₀, θ₁, θ_c…, α₀, α₁, α₂, [α₃], α_c…, [σ²])`:
//! mediator-model coefficients, outcome-model coefficients (α₃ only with an
//! exposure–mediator interaction), then the linear mediator's residual
//! variance for continuous mediators.
//!
//! Effects are returned on their working scale: log-IRR on the ratio scale
//! and the raw mean difference on the difference scale.

use nalgebra::DVector;

use super::{MediatorType, Scale};
use crate::error::{Error, Result};
use crate::special::{logistic, softplus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    pub n_cov: usize,
    pub interaction: bool,
    pub mediator: MediatorType,
}

impl ParamLayout {
    pub fn theta_len(&self) -> usize {
        2 + self.n_cov
    }

    pub fn alpha_len(&self) -> usize {
        3 + usize::from(self.interaction) + self.n_cov
    }

    pub fn alpha_offset(&self) -> usize {
        self.theta_len()
    }

    pub fn sigma2_index(&self) -> Option<usize> {
        match self.mediator {
            MediatorType::Continuous => Some(self.theta_len() + self.alpha_len()),
            MediatorType::Binary => None,
        }
    }

    pub fn len(&self) -> usize {
        self.theta_len() + self.alpha_len() + usize::from(self.sigma2_index().is_some())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn alpha_cov_offset(&self) -> usize {
        self.alpha_offset() + 3 + usize::from(self.interaction)
    }

    pub fn pack(&self, theta: &[f64], alpha: &[f64], sigma2: Option<f64>) -> Result<DVector<f64>> {
        if theta.len() != self.theta_len() || alpha.len() != self.alpha_len() {
            return Err(Error::SpecMismatch(format!(
                "expected {} mediator and {} outcome coefficients, got {} and {}",
                self.theta_len(),
                self.alpha_len(),
                theta.len(),
                alpha.len()
            )));
        }
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(theta);
        v.extend_from_slice(alpha);
        match (self.sigma2_index(), sigma2) {
            (Some(_), Some(s)) => v.push(s),
            (Some(_), None) => {
                return Err(Error::SpecMismatch("continuous mediator needs a residual variance".into()))
            }
            (None, _) => {}
        }
        Ok(DVector::from_vec(v))
    }

    /// Human-readable names of the flat parameters.
    pub fn labels(&self) -> Vec<String> {
        let mut out = vec!["theta0".to_string(), "theta1".to_string()];
        out.extend((0..self.n_cov).map(|j| format!("theta_c{j}")));
        out.extend(["alpha0", "alpha1", "alpha2"].map(String::from));
        if self.interaction {
            out.push("alpha3".into());
        }
        out.extend((0..self.n_cov).map(|j| format!("alpha_c{j}")));
        if self.sigma2_index().is_some() {
            out.push("sigma2".into());
        }
        out
    }
}

/// Exposure contrast and evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Contrast {
    pub x: f64,
    pub x_star: f64,
    pub c: Vec<f64>,
    pub m_cde: f64,
}

/// Effects on the working scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectValues {
    pub nde: f64,
    pub nie: f64,
    pub cde: f64,
    pub te: f64,
}

/// Gradients of [`EffectValues`] with respect to the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectGradients {
    pub nde: DVector<f64>,
    pub nie: DVector<f64>,
    pub cde: DVector<f64>,
    pub te: DVector<f64>,
}

struct View<'a> {
    layout: ParamLayout,
    theta0: f64,
    theta1: f64,
    theta_c: &'a [f64],
    alpha0: f64,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
    alpha_c: &'a [f64],
    sigma2: f64,
}

impl<'a> View<'a> {
    fn new(layout: ParamLayout, p: &'a DVector<f64>) -> Self {
        let s = p.as_slice();
        let k = layout.n_cov;
        let a = layout.alpha_offset();
        Self {
            layout,
            theta0: s[0],
            theta1: s[1],
            theta_c: &s[2..2 + k],
            alpha0: s[a],
            alpha1: s[a + 1],
            alpha2: s[a + 2],
            alpha3: if layout.interaction { s[a + 3] } else { 0.0 },
            alpha_c: &s[layout.alpha_cov_offset()..layout.alpha_cov_offset() + k],
            sigma2: layout.sigma2_index().map_or(0.0, |i| s[i]),
        }
    }

    /// Mediator-model linear predictor at exposure `xm`.
    fn mediator_lp(&self, xm: f64, c: &[f64]) -> f64 {
        self.theta0 + self.theta1 * xm + dot(self.theta_c, c)
    }

    /// Coefficient on the mediator in the outcome model at exposure `xa`.
    fn mediator_slope(&self, xa: f64) -> f64 {
        self.alpha2 + self.alpha3 * xa
    }

    /// `log E[Y_{xa, M_xm} | c]`.
    fn log_cf_mean(&self, xa: f64, xm: f64, c: &[f64]) -> f64 {
        let base = self.alpha0 + self.alpha1 * xa + dot(self.alpha_c, c);
        let a = self.mediator_slope(xa);
        let eta = self.mediator_lp(xm, c);
        match self.layout.mediator {
            MediatorType::Continuous => base + a * eta + 0.5 * a * a * self.sigma2,
            MediatorType::Binary => base + softplus(a + eta) - softplus(eta),
        }
    }

    fn grad_log_cf_mean(&self, xa: f64, xm: f64, c: &[f64]) -> DVector<f64> {
        let l = self.layout;
        let mut g = DVector::zeros(l.len());
        let a = self.mediator_slope(xa);
        let eta = self.mediator_lp(xm, c);
        // d/dθ₀ and d/dα₂ of the mediator term.
        let (d_theta, d_alpha2) = match l.mediator {
            MediatorType::Continuous => (a, eta + a * self.sigma2),
            MediatorType::Binary => {
                let s = logistic(a + eta);
                (s - logistic(eta), s)
            }
        };
        g[0] = d_theta;
        g[1] = d_theta * xm;
        for (j, cj) in c.iter().enumerate() {
            g[2 + j] = d_theta * cj;
        }
        let o = l.alpha_offset();
        g[o] = 1.0;
        g[o + 1] = xa;
        g[o + 2] = d_alpha2;
        if l.interaction {
            g[o + 3] = xa * d_alpha2;
        }
        let oc = l.alpha_cov_offset();
        for (j, cj) in c.iter().enumerate() {
            g[oc + j] = *cj;
        }
        if let Some(i) = l.sigma2_index() {
            g[i] = 0.5 * a * a;
        }
        g
    }

    /// `log E[Y | x, m, c]`.
    fn log_cond_mean(&self, x: f64, m: f64, c: &[f64]) -> f64 {
        self.alpha0 + self.alpha1 * x + self.alpha2 * m + self.alpha3 * x * m + dot(self.alpha_c, c)
    }

    fn grad_log_cond_mean(&self, x: f64, m: f64, c: &[f64]) -> DVector<f64> {
        let l = self.layout;
        let mut g = DVector::zeros(l.len());
        let o = l.alpha_offset();
        g[o] = 1.0;
        g[o + 1] = x;
        g[o + 2] = m;
        if l.interaction {
            g[o + 3] = x * m;
        }
        let oc = l.alpha_cov_offset();
        for (j, cj) in c.iter().enumerate() {
            g[oc + j] = *cj;
        }
        g
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check(layout: ParamLayout, params: &DVector<f64>, contrast: &Contrast) -> Result<()> {
    if params.len() != layout.len() {
        return Err(Error::SpecMismatch(format!(
            "parameter vector has length {}, layout expects {}",
            params.len(),
            layout.len()
        )));
    }
    if contrast.c.len() != layout.n_cov {
        return Err(Error::SpecMismatch(format!(
            "covariate vector has length {}, models have {} covariates",
            contrast.c.len(),
            layout.n_cov
        )));
    }
    Ok(())
}

/// NDE, NIE, CDE and TE on the working scale.
pub fn effect_values(
    layout: ParamLayout,
    params: &DVector<f64>,
    contrast: &Contrast,
    scale: Scale,
) -> Result<EffectValues> {
    check(layout, params, contrast)?;
    let v = View::new(layout, params);
    let (x, xs, c, m) = (contrast.x, contrast.x_star, contrast.c.as_slice(), contrast.m_cde);
    let d = x - xs;
    let out = match scale {
        Scale::Ratio => {
            let (nde, nie, cde) = match (layout.mediator, layout.interaction) {
                (MediatorType::Continuous, false) => (v.alpha1 * d, v.alpha2 * v.theta1 * d, v.alpha1 * d),
                (MediatorType::Continuous, true) => {
                    let nde = (v.alpha1 + v.alpha3 * (v.mediator_lp(xs, c) + v.alpha2 * v.sigma2)) * d
                        + 0.5 * v.alpha3 * v.alpha3 * v.sigma2 * (x * x - xs * xs);
                    let nie = (v.alpha2 * v.theta1 + v.alpha3 * v.theta1 * x) * d;
                    (nde, nie, (v.alpha1 + v.alpha3 * m) * d)
                }
                (MediatorType::Binary, interaction) => {
                    let eta = v.mediator_lp(x, c);
                    let eta_s = v.mediator_lp(xs, c);
                    let a = v.mediator_slope(x);
                    let a_s = v.mediator_slope(xs);
                    let nie = (softplus(a + eta) - softplus(a + eta_s)) + (softplus(eta_s) - softplus(eta));
                    if interaction {
                        let nde = v.alpha1 * d + softplus(a + eta_s) - softplus(a_s + eta_s);
                        (nde, nie, (v.alpha1 + v.alpha3 * m) * d)
                    } else {
                        (v.alpha1 * d, nie, v.alpha1 * d)
                    }
                }
            };
            EffectValues { nde, nie, cde, te: nde + nie }
        }
        Scale::Difference => {
            let e_xx = v.log_cf_mean(x, x, c).exp();
            let e_xs = v.log_cf_mean(x, xs, c).exp();
            let e_ss = v.log_cf_mean(xs, xs, c).exp();
            let nde = e_xs - e_ss;
            let nie = e_xx - e_xs;
            let cde = v.log_cond_mean(x, m, c).exp() - v.log_cond_mean(xs, m, c).exp();
            EffectValues { nde, nie, cde, te: nde + nie }
        }
    };
    Ok(out)
}

/// Exact gradients of [`effect_values`].
pub fn effect_gradients(
    layout: ParamLayout,
    params: &DVector<f64>,
    contrast: &Contrast,
    scale: Scale,
) -> Result<EffectGradients> {
    check(layout, params, contrast)?;
    let v = View::new(layout, params);
    let (x, xs, c, m) = (contrast.x, contrast.x_star, contrast.c.as_slice(), contrast.m_cde);
    let g_xx = v.grad_log_cf_mean(x, x, c);
    let g_xs = v.grad_log_cf_mean(x, xs, c);
    let g_ss = v.grad_log_cf_mean(xs, xs, c);
    let g_cx = v.grad_log_cond_mean(x, m, c);
    let g_cs = v.grad_log_cond_mean(xs, m, c);
    let (nde, nie, cde) = match scale {
        Scale::Ratio => (&g_xs - &g_ss, &g_xx - &g_xs, &g_cx - &g_cs),
        Scale::Difference => {
            let e_xx = v.log_cf_mean(x, x, c).exp();
            let e_xs = v.log_cf_mean(x, xs, c).exp();
            let e_ss = v.log_cf_mean(xs, xs, c).exp();
            let e_cx = v.log_cond_mean(x, m, c).exp();
            let e_cs = v.log_cond_mean(xs, m, c).exp();
            (
                &g_xs * e_xs - &g_ss * e_ss,
                &g_xx * e_xx - &g_xs * e_xs,
                &g_cx * e_cx - &g_cs * e_cs,
            )
        }
    };
    let te = &nde + &nie;
    Ok(EffectGradients { nde, nie, cde, te })
}
