//! Mediator models (linear, logistic) and the Poisson comparator outcome model.
//!
//! Every design matrix carries an explicit leading intercept column.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inverse, symmetrize, weighted_gram, weighted_sum};
use crate::optimizer::{maximize, Objective, OptimSettings};
use crate::special::{ln_factorial, logistic, softplus};

/// Coefficient magnitude beyond which a logistic or Poisson fit is declared
/// non-convergent (separation or a mean collapsing to zero).
pub const COEFFICIENT_BOUND: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    /// Intercept, exposure, covariates.
    pub theta: DVector<f64>,
    /// Residual variance, RSS / (n − p).
    pub sigma2: f64,
    /// Variance of `sigma2`, 2σ̂⁴ / (n − p).
    pub sigma2_var: f64,
    pub cov_theta: DMatrix<f64>,
    pub n: usize,
    pub p: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Logistic,
    Poisson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmFit {
    pub family: Family,
    pub coefficients: DVector<f64>,
    /// Inverse observed information.
    pub cov_model: DMatrix<f64>,
    /// Sandwich covariance.
    pub cov_robust: DMatrix<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub n: usize,
}

fn check_shapes(design: &DMatrix<f64>, response_len: usize) -> Result<()> {
    let (n, p) = design.shape();
    if n != response_len {
        return Err(Error::DimensionMismatch(format!(
            "design has {n} rows but response has {response_len} entries"
        )));
    }
    if p == 0 || n <= p {
        return Err(Error::DimensionMismatch(format!(
            "need more observations than parameters (n = {n}, p = {p})"
        )));
    }
    Ok(())
}

/// Fails with `RankDeficient` when the columns of `design` are (numerically) collinear.
pub fn check_full_rank(design: &DMatrix<f64>) -> Result<()> {
    let p = design.ncols();
    // Column-equilibrate so scale differences do not masquerade as collinearity.
    let mut scaled = design.clone();
    for j in 0..p {
        let norm = scaled.column(j).norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::RankDeficient);
        }
        scaled.column_mut(j).scale_mut(1.0 / norm);
    }
    let r = scaled.qr().r();
    let diag: Vec<f64> = (0..p).map(|i| r[(i, i)].abs()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    if diag.iter().any(|d| *d <= 1e-10 * largest) {
        return Err(Error::RankDeficient);
    }
    Ok(())
}

/// Ordinary least squares with the unbiased residual variance.
pub fn fit_linear(design: &DMatrix<f64>, response: &DVector<f64>) -> Result<LinearFit> {
    check_shapes(design, response.len())?;
    check_full_rank(design)?;
    let (n, p) = design.shape();
    let xtx = design.tr_mul(design);
    let xty = design.tr_mul(response);
    let chol = xtx.cholesky().ok_or(Error::RankDeficient)?;
    let theta = chol.solve(&xty);
    let mut xtx_inv = chol.inverse();
    symmetrize(&mut xtx_inv);

    let resid = response - design * &theta;
    let rss = resid.norm_squared();
    let df = (n - p) as f64;
    let sigma2 = rss / df;
    Ok(LinearFit {
        cov_theta: xtx_inv * sigma2,
        sigma2_var: 2.0 * sigma2 * sigma2 / df,
        theta,
        sigma2,
        n,
        p,
    })
}

struct GlmObjective<'a> {
    family: Family,
    design: &'a DMatrix<f64>,
    response: &'a DVector<f64>,
}

impl GlmObjective<'_> {
    fn linear_predictor(&self, beta: &DVector<f64>) -> DVector<f64> {
        self.design * beta
    }

    /// Per-observation working residual `y − E[y]` and curvature weight.
    fn residual_and_weight(&self, eta: f64, y: f64) -> (f64, f64) {
        match self.family {
            Family::Logistic => {
                let p = logistic(eta);
                (y - p, p * (1.0 - p))
            }
            Family::Poisson => {
                let mu = eta.exp();
                (y - mu, mu)
            }
        }
    }

    fn per_obs_scores(&self, beta: &DVector<f64>) -> DMatrix<f64> {
        let eta = self.linear_predictor(beta);
        let mut scores = self.design.clone();
        for (i, mut row) in scores.row_iter_mut().enumerate() {
            let (r, _) = self.residual_and_weight(eta[i], self.response[i]);
            row *= r;
        }
        scores
    }
}

impl Objective for GlmObjective<'_> {
    fn value(&self, beta: &DVector<f64>) -> f64 {
        let eta = self.linear_predictor(beta);
        eta.iter()
            .zip(self.response.iter())
            .map(|(&e, &y)| match self.family {
                Family::Logistic => y * e - softplus(e),
                Family::Poisson => y * e - e.exp() - ln_factorial(y),
            })
            .sum()
    }

    fn gradient(&self, beta: &DVector<f64>) -> DVector<f64> {
        let eta = self.linear_predictor(beta);
        let r: Vec<f64> = eta
            .iter()
            .zip(self.response.iter())
            .map(|(&e, &y)| self.residual_and_weight(e, y).0)
            .collect();
        weighted_sum(self.design, &r)
    }

    fn hessian(&self, beta: &DVector<f64>) -> Option<DMatrix<f64>> {
        let eta = self.linear_predictor(beta);
        let w: Vec<f64> = eta
            .iter()
            .zip(self.response.iter())
            .map(|(&e, &y)| self.residual_and_weight(e, y).1)
            .collect();
        Some(-weighted_gram(self.design, &w))
    }
}

fn fit_glm(family: Family, design: &DMatrix<f64>, response: &DVector<f64>) -> Result<GlmFit> {
    check_shapes(design, response.len())?;
    check_full_rank(design)?;
    let n = design.nrows();
    let mean = response.mean();
    let intercept = match family {
        Family::Logistic => {
            if response.iter().any(|&y| y != 0.0 && y != 1.0) {
                return Err(Error::InvalidInput("logistic response must be 0/1".into()));
            }
            if mean == 0.0 || mean == 1.0 {
                return Err(Error::NonConvergence("response has a single class".into()));
            }
            (mean / (1.0 - mean)).ln()
        }
        Family::Poisson => {
            if response.iter().any(|&y| y < 0.0 || y.fract() != 0.0) {
                return Err(Error::InvalidInput(
                    "Poisson response must be non-negative integers".into(),
                ));
            }
            if mean == 0.0 {
                return Err(Error::NonConvergence("response is identically zero".into()));
            }
            mean.ln()
        }
    };
    let mut init = DVector::zeros(design.ncols());
    init[0] = intercept;

    let objective = GlmObjective { family, design, response };
    let settings = OptimSettings { param_bound: Some(COEFFICIENT_BOUND), ..Default::default() };
    let opt = maximize(&objective, &init, &settings)?;

    let information = -&opt.hessian;
    let cov_model = match inverse(&information) {
        Ok(mut c) => {
            symmetrize(&mut c);
            c
        }
        Err(_) if !opt.converged => {
            return Err(Error::NonConvergence(format!("{family:?} fit diverged")));
        }
        Err(e) => return Err(e),
    };
    let scores = objective.per_obs_scores(&opt.parameters);
    let cov_robust = sandwich_covariance(&scores, &opt.hessian)?;
    Ok(GlmFit {
        family,
        coefficients: opt.parameters,
        cov_model,
        cov_robust,
        loglik: opt.loglik,
        converged: opt.converged,
        iterations: opt.iterations,
        gradient_norm: opt.gradient_norm,
        n,
    })
}

/// Logistic regression by maximum likelihood. Separation shows up as
/// `converged = false` once a coefficient passes [`COEFFICIENT_BOUND`].
pub fn fit_logistic(design: &DMatrix<f64>, response: &DVector<f64>) -> Result<GlmFit> {
    fit_glm(Family::Logistic, design, response)
}

/// Log-linear Poisson regression by maximum likelihood.
pub fn fit_poisson(design: &DMatrix<f64>, response: &DVector<f64>) -> Result<GlmFit> {
    fit_glm(Family::Poisson, design, response)
}

/// `A⁻¹ B A⁻¹` with `A = −hessian` and `B = Σᵢ sᵢsᵢᵀ` over the rows of `per_obs_scores`.
pub fn sandwich_covariance(
    per_obs_scores: &DMatrix<f64>,
    hessian: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let p = hessian.nrows();
    if hessian.ncols() != p || per_obs_scores.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "scores have {} columns, hessian is {}x{}",
            per_obs_scores.ncols(),
            hessian.nrows(),
            hessian.ncols()
        )));
    }
    let a_inv = inverse(&-hessian)?;
    let meat = per_obs_scores.tr_mul(per_obs_scores);
    let mut out = &a_inv * meat * &a_inv;
    symmetrize(&mut out);
    Ok(out)
}
