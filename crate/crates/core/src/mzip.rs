//! Marginalized zero-inflated Poisson (MZIP) outcome model.
//!
//! Both components share one design matrix `Z`:
//!
//! * `logit(ψᵢ) = Zᵢγ` is the excess-zero probability,
//! * `log(νᵢ) = Zᵢα` is the overall mean `ν = (1 − ψ)μ`,
//!
//! so the latent Poisson mean is `μᵢ = exp(Zᵢα + softplus(Zᵢγ))`.
//! Parameter vectors for the joint problem are ordered `(γ, α)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::glm::{fit_logistic, fit_poisson};
use crate::linalg::{inverse, max_abs, symmetrize, weighted_cross, weighted_gram};
use crate::optimizer::{maximize, Objective, OptimSettings};
use crate::special::{ln_factorial, log_add_exp, logistic, softplus};

#[derive(Debug, Clone, PartialEq)]
pub struct MzipFit {
    /// Overall-mean coefficients in design-column order.
    pub alpha: DVector<f64>,
    /// Excess-zero coefficients in design-column order.
    pub gamma: DVector<f64>,
    pub loglik: f64,
    /// Model-based covariance of `(γ, α)`, size 2p × 2p.
    pub cov_joint: DMatrix<f64>,
    /// Sandwich covariance of `(γ, α)`.
    pub cov_joint_robust: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub n: usize,
    pub p: usize,
}

impl MzipFit {
    /// The α block of the joint covariance.
    pub fn alpha_cov(&self, robust: bool) -> DMatrix<f64> {
        let src = if robust { &self.cov_joint_robust } else { &self.cov_joint };
        src.view((self.p, self.p), (self.p, self.p)).into_owned()
    }

    /// The γ block of the joint covariance.
    pub fn gamma_cov(&self, robust: bool) -> DMatrix<f64> {
        let src = if robust { &self.cov_joint_robust } else { &self.cov_joint };
        src.view((0, 0), (self.p, self.p)).into_owned()
    }

    pub fn se_alpha(&self, robust: bool) -> DVector<f64> {
        self.alpha_cov(robust).diagonal().map(f64::sqrt)
    }

    pub fn se_gamma(&self, robust: bool) -> DVector<f64> {
        self.gamma_cov(robust).diagonal().map(f64::sqrt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MzipMeans {
    /// Overall mean ν.
    pub nu: DVector<f64>,
    /// Excess-zero probability ψ.
    pub psi: DVector<f64>,
    /// Latent Poisson mean μ.
    pub mu: DVector<f64>,
}

/// Log-likelihood contribution and its first and second derivatives with
/// respect to `(η_γ, η_α)` for one observation.
#[derive(Debug, Clone, Copy)]
struct Contribution {
    ll: f64,
    g_gamma: f64,
    g_alpha: f64,
    h_gg: f64,
    h_ga: f64,
    h_aa: f64,
}

fn contribution(eta_g: f64, eta_a: f64, y: f64) -> Contribution {
    let sp = softplus(eta_g);
    let psi = logistic(eta_g);
    let log_mu = eta_a + sp;
    let mu = log_mu.exp();
    if y > 0.0 {
        let r = y - mu - 1.0;
        Contribution {
            ll: -sp - mu + y * log_mu - ln_factorial(y),
            g_gamma: psi * r,
            g_alpha: y - mu,
            h_gg: psi * (1.0 - psi) * r - mu * psi * psi,
            h_ga: -mu * psi,
            h_aa: -mu,
        }
    } else {
        // Posterior weight of the excess-zero component given y = 0.
        let w = logistic(eta_g + mu);
        let wc = logistic(-(eta_g + mu));
        let mp = mu * psi;
        Contribution {
            ll: log_add_exp(eta_g, -mu) - sp,
            g_gamma: w - wc * mp - psi,
            g_alpha: -wc * mu,
            h_gg: w * wc * (1.0 + mp).powi(2) - wc * mp - psi * (1.0 - psi),
            h_ga: w * wc * mu * (1.0 + mp) - wc * mp,
            h_aa: wc * mu * (w * mu - 1.0),
        }
    }
}

fn check_inputs(alpha: &DVector<f64>, gamma: &DVector<f64>, design: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    let (n, p) = design.shape();
    if alpha.len() != p || gamma.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "design has {p} columns, alpha {} and gamma {}",
            alpha.len(),
            gamma.len()
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("design has {n} rows, y has {}", y.len())));
    }
    Ok(())
}

fn contributions(
    alpha: &DVector<f64>,
    gamma: &DVector<f64>,
    design: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Vec<Contribution> {
    let eta_g = design * gamma;
    let eta_a = design * alpha;
    (0..y.len()).map(|i| contribution(eta_g[i], eta_a[i], y[i])).collect()
}

/// Σᵢ ℓᵢ of the MZIP likelihood.
pub fn mzip_loglik(
    alpha: &DVector<f64>,
    gamma: &DVector<f64>,
    design: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    check_inputs(alpha, gamma, design, y)?;
    let ll: f64 = contributions(alpha, gamma, design, y).iter().map(|c| c.ll).sum();
    if ll.is_finite() {
        Ok(ll)
    } else {
        Err(Error::NonFinite("MZIP log-likelihood".into()))
    }
}

/// Gradient of [`mzip_loglik`] with respect to `(γ, α)`.
pub fn mzip_score(
    alpha: &DVector<f64>,
    gamma: &DVector<f64>,
    design: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_inputs(alpha, gamma, design, y)?;
    let score = score_from(&contributions(alpha, gamma, design, y), design);
    if score.iter().all(|v| v.is_finite()) {
        Ok(score)
    } else {
        Err(Error::NonFinite("MZIP score".into()))
    }
}

/// Hessian of [`mzip_loglik`] with respect to `(γ, α)`.
pub fn mzip_hessian(
    alpha: &DVector<f64>,
    gamma: &DVector<f64>,
    design: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    check_inputs(alpha, gamma, design, y)?;
    let h = hessian_from(&contributions(alpha, gamma, design, y), design);
    if h.iter().all(|v| v.is_finite()) {
        Ok(h)
    } else {
        Err(Error::NonFinite("MZIP hessian".into()))
    }
}

/// Per-observation scores, one row per observation, columns `(γ, α)`.
pub fn mzip_per_obs_scores(
    alpha: &DVector<f64>,
    gamma: &DVector<f64>,
    design: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    check_inputs(alpha, gamma, design, y)?;
    let cs = contributions(alpha, gamma, design, y);
    let (n, p) = design.shape();
    let mut out = DMatrix::zeros(n, 2 * p);
    for j in 0..p {
        let zj = design.column(j);
        for (i, c) in cs.iter().enumerate() {
            out[(i, j)] = c.g_gamma * zj[i];
            out[(i, p + j)] = c.g_alpha * zj[i];
        }
    }
    Ok(out)
}

fn score_from(cs: &[Contribution], design: &DMatrix<f64>) -> DVector<f64> {
    let p = design.ncols();
    let gg: Vec<f64> = cs.iter().map(|c| c.g_gamma).collect();
    let ga: Vec<f64> = cs.iter().map(|c| c.g_alpha).collect();
    let mut out = DVector::zeros(2 * p);
    out.rows_mut(0, p).copy_from(&design.tr_mul(&DVector::from_vec(gg)));
    out.rows_mut(p, p).copy_from(&design.tr_mul(&DVector::from_vec(ga)));
    out
}

fn hessian_from(cs: &[Contribution], design: &DMatrix<f64>) -> DMatrix<f64> {
    let p = design.ncols();
    let hgg: Vec<f64> = cs.iter().map(|c| c.h_gg).collect();
    let hga: Vec<f64> = cs.iter().map(|c| c.h_ga).collect();
    let haa: Vec<f64> = cs.iter().map(|c| c.h_aa).collect();
    let mut out = DMatrix::zeros(2 * p, 2 * p);
    let cross = weighted_cross(design, &hga, design);
    out.view_mut((0, 0), (p, p)).copy_from(&weighted_gram(design, &hgg));
    out.view_mut((0, p), (p, p)).copy_from(&cross);
    out.view_mut((p, 0), (p, p)).copy_from(&cross.transpose());
    out.view_mut((p, p), (p, p)).copy_from(&weighted_gram(design, &haa));
    symmetrize(&mut out);
    out
}

struct MzipObjective<'a> {
    design: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
}

impl MzipObjective<'_> {
    fn split(&self, params: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let p = self.design.ncols();
        (params.rows(p, p).into_owned(), params.rows(0, p).into_owned())
    }

    fn eval(&self, params: &DVector<f64>) -> Vec<Contribution> {
        let (alpha, gamma) = self.split(params);
        contributions(&alpha, &gamma, self.design, self.y)
    }
}

impl Objective for MzipObjective<'_> {
    fn value(&self, params: &DVector<f64>) -> f64 {
        self.eval(params).iter().map(|c| c.ll).sum()
    }

    fn gradient(&self, params: &DVector<f64>) -> DVector<f64> {
        score_from(&self.eval(params), self.design)
    }

    fn hessian(&self, params: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(hessian_from(&self.eval(params), self.design))
    }
}

fn validate_counts(y: &DVector<f64>) -> Result<()> {
    if let Some(i) = y.iter().position(|&v| !(v >= 0.0 && v.fract() == 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "outcome must be a non-negative integer (row {i} has {})",
            y[i]
        )));
    }
    Ok(())
}

/// Start values: γ from a logistic regression of 1{y = 0} on Z and α from a
/// Poisson regression of y on Z. Either falls back to an intercept-only
/// start when its auxiliary fit fails.
fn starting_values(design: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let p = design.ncols();
    let zero = y.map(|v| if v == 0.0 { 1.0 } else { 0.0 });
    let mut init = DVector::zeros(2 * p);
    match fit_logistic(design, &zero) {
        Ok(f) if f.converged => init.rows_mut(0, p).copy_from(&f.coefficients),
        _ => {
            let rate = zero.mean();
            init[0] = (rate / (1.0 - rate)).ln();
        }
    }
    match fit_poisson(design, y) {
        Ok(f) if f.converged => init.rows_mut(p, p).copy_from(&f.coefficients),
        _ => init[p] = y.mean().ln(),
    }
    init
}

/// Maximum-likelihood MZIP fit with model-based and sandwich covariance.
///
/// Non-convergence is reported through `converged = false` with the last
/// iterate retained; covariance entries are NaN if the information matrix is
/// singular there.
pub fn mzip_fit(design: &DMatrix<f64>, y: &DVector<f64>, settings: &OptimSettings) -> Result<MzipFit> {
    let (n, p) = design.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("design has {n} rows, y has {}", y.len())));
    }
    if n <= 2 * p {
        return Err(Error::DimensionMismatch(format!(
            "need n > 2p observations (n = {n}, p = {p})"
        )));
    }
    validate_counts(y)?;
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateOutcome("outcome is identically zero".into()));
    }
    if y.iter().all(|&v| v > 0.0) {
        return Err(Error::DegenerateOutcome("outcome has no zeros".into()));
    }
    crate::glm::check_full_rank(design)?;

    let objective = MzipObjective { design, y };
    let init = starting_values(design, y);
    let opt = maximize(&objective, &init, settings)?;

    let information = -&opt.hessian;
    let nan = || DMatrix::from_element(2 * p, 2 * p, f64::NAN);
    let (cov_joint, cov_joint_robust) = match inverse(&information) {
        Ok(mut cov) => {
            symmetrize(&mut cov);
            let (alpha, gamma) = objective.split(&opt.parameters);
            let scores = mzip_per_obs_scores(&alpha, &gamma, design, y)?;
            let meat = scores.tr_mul(&scores);
            let mut robust = &cov * meat * &cov;
            symmetrize(&mut robust);
            (cov, robust)
        }
        Err(_) if !opt.converged => (nan(), nan()),
        Err(e) => return Err(e),
    };
    let (alpha, gamma) = objective.split(&opt.parameters);
    Ok(MzipFit {
        alpha,
        gamma,
        loglik: opt.loglik,
        cov_joint,
        cov_joint_robust,
        converged: opt.converged,
        iterations: opt.iterations,
        gradient_norm: max_abs(&opt.gradient),
        n,
        p,
    })
}

/// Fitted ν, ψ and μ at the rows of `design`.
pub fn mzip_means(fit: &MzipFit, design: &DMatrix<f64>) -> Result<MzipMeans> {
    if design.ncols() != fit.p {
        return Err(Error::DimensionMismatch(format!(
            "design has {} columns, fit has p = {}",
            design.ncols(),
            fit.p
        )));
    }
    let eta_g = design * &fit.gamma;
    let eta_a = design * &fit.alpha;
    let psi = eta_g.map(logistic);
    let nu = eta_a.map(f64::exp);
    let mu = DVector::from_iterator(nu.len(), nu.iter().zip(psi.iter()).map(|(v, s)| v / (1.0 - s)));
    Ok(MzipMeans { nu, psi, mu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::finite_diff_gradient;

    fn one_row(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(1, v.len(), v)
    }

    #[test]
    fn zero_count_closed_form() {
        // ψ = 0.5 needs η_γ = 0; μ = 1 then needs η_α = log(1) − softplus(0) = −log 2.
        let ll = mzip_loglik(
            &DVector::from_vec(vec![-(2f64.ln())]),
            &DVector::from_vec(vec![0.0]),
            &one_row(&[1.0]),
            &DVector::from_vec(vec![0.0]),
        )
        .unwrap();
        assert!((ll - (0.5 + 0.5 * (-1f64).exp()).ln()).abs() < 1e-14);
        assert!((ll + 0.37989).abs() < 1e-5);
    }

    #[test]
    fn positive_count_reduces_to_poisson() {
        let eta_g = -30.0;
        let alpha = DVector::from_vec(vec![2f64.ln() - softplus(eta_g)]);
        let ll = mzip_loglik(&alpha, &DVector::from_vec(vec![eta_g]), &one_row(&[1.0]), &DVector::from_vec(vec![3.0]))
            .unwrap();
        let pois = -2.0 + 3.0 * 2f64.ln() - 6f64.ln();
        assert!((ll - pois).abs() < 1e-10);
        assert!((ll + 1.71231).abs() < 1e-5);
    }

    #[test]
    fn alpha_score_vanishes_when_zero_is_certain() {
        let s = mzip_score(
            &DVector::from_vec(vec![0.3]),
            &DVector::from_vec(vec![30.0]),
            &one_row(&[1.0]),
            &DVector::from_vec(vec![0.0]),
        )
        .unwrap();
        assert!(s[1].abs() < 1e-10);
    }

    #[test]
    fn analytic_hessian_matches_finite_difference_of_score() {
        let design = DMatrix::from_fn(25, 3, |i, j| if j == 0 { 1.0 } else { ((i * (j + 2)) as f64 * 0.41).sin() * 1.5 });
        let y = DVector::from_iterator(25, (0..25).map(|i| f64::from([0, 0, 1, 3, 0, 2, 7][i % 7])));
        let alpha = DVector::from_vec(vec![0.2, -0.4, 0.3]);
        let gamma = DVector::from_vec(vec![-0.3, 0.8, -0.5]);
        let h = mzip_hessian(&alpha, &gamma, &design, &y).unwrap();
        let params = {
            let mut v = DVector::zeros(6);
            v.rows_mut(0, 3).copy_from(&gamma);
            v.rows_mut(3, 3).copy_from(&alpha);
            v
        };
        let obj = MzipObjective { design: &design, y: &y };
        for j in 0..6 {
            let col = finite_diff_gradient(|v| obj.gradient(v)[j], &params, None).unwrap();
            for k in 0..6 {
                assert!((h[(j, k)] - col[k]).abs() < 1e-6 * h[(j, k)].abs().max(1.0), "({j},{k})");
            }
        }
    }

    #[test]
    fn means_identity() {
        let fit = MzipFit {
            alpha: DVector::from_vec(vec![0.0, 0.4]),
            gamma: DVector::from_vec(vec![0.0, -1.1]),
            loglik: 0.0,
            cov_joint: DMatrix::zeros(4, 4),
            cov_joint_robust: DMatrix::zeros(4, 4),
            converged: true,
            iterations: 0,
            gradient_norm: 0.0,
            n: 0,
            p: 2,
        };
        let design = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.5, 1.0, -2.0]);
        let m = mzip_means(&fit, &design).unwrap();
        assert!((m.psi[0] - 0.5).abs() < 1e-15);
        assert!((m.nu[0] - 1.0).abs() < 1e-15);
        assert!((m.mu[0] - 2.0).abs() < 1e-15);
        for i in 0..3 {
            assert!((m.nu[i] - (1.0 - m.psi[i]) * m.mu[i]).abs() < 1e-12);
        }
        assert!(mzip_means(&fit, &DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn degenerate_outcomes_rejected() {
        let design = DMatrix::from_element(10, 1, 1.0);
        assert!(matches!(
            mzip_fit(&design, &DVector::zeros(10), &OptimSettings::default()),
            Err(Error::DegenerateOutcome(_))
        ));
        assert!(matches!(
            mzip_fit(&design, &DVector::from_element(10, 2.0), &OptimSettings::default()),
            Err(Error::DegenerateOutcome(_))
        ));
        let mut y = DVector::from_element(10, 2.0);
        y[0] = -1.0;
        assert!(matches!(mzip_fit(&design, &y, &OptimSettings::default()), Err(Error::InvalidInput(_))));
    }
}
