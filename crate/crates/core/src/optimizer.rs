//! Newton ascent with step-halving, plus central finite-difference helpers
//! that double as verification oracles for analytic derivatives.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, symmetrize};

/// A scalar objective to be maximized.
pub trait Objective {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Analytic Hessian. When `None`, central differences of the gradient are used.
    fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimSettings {
    pub max_iterations: usize,
    /// Relative log-likelihood change below which a non-Newton step counts as stalled.
    pub tol_loglik: f64,
    /// Max-abs gradient threshold for convergence.
    pub tol_grad: f64,
    pub step_halving_max: usize,
    /// Stop (non-converged) as soon as any parameter exceeds this magnitude.
    pub param_bound: Option<f64>,
}

impl Default for OptimSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tol_loglik: 1e-8,
            tol_grad: 1e-6,
            step_halving_max: 30,
            param_bound: None,
        }
    }
}

impl OptimSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.step_halving_max == 0 {
            return Err(Error::InvalidInput(
                "max_iterations and step_halving_max must be positive".into(),
            ));
        }
        if !(self.tol_loglik > 0.0 && self.tol_grad > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub parameters: DVector<f64>,
    pub loglik: f64,
    /// Max-abs gradient at `parameters`.
    pub gradient_norm: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Objective at the start point and after every accepted step.
    pub trace: Vec<f64>,
    pub bound_exceeded: bool,
}

/// Slack for "non-decreasing": objective values that differ by less than a
/// few ulps of the objective are treated as equal.
pub fn ascent_slack(f: f64) -> f64 {
    64.0 * f64::EPSILON * (1.0 + f.abs())
}

/// Maximizes `objective` from `init`.
///
/// Each iteration takes a Newton step when the negative Hessian is positive
/// definite and a diagonally shifted Newton step otherwise, then halves the
/// step until the objective does not decrease. Running out of iterations is reported via
/// `converged = false`, not as an error.
pub fn maximize<O: Objective + ?Sized>(
    objective: &O,
    init: &DVector<f64>,
    settings: &OptimSettings,
) -> Result<OptimResult> {
    settings.validate()?;
    let mut x = init.clone();
    let mut f = objective.value(&x);
    if !f.is_finite() {
        return Err(Error::NonFinite("objective at initial value".into()));
    }
    let mut g = objective.gradient(&x);
    if !g.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("gradient at initial value".into()));
    }
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut converged = max_abs(&g) <= settings.tol_grad;
    let mut bound_exceeded = false;

    while !converged && iterations < settings.max_iterations {
        iterations += 1;
        let hess = hessian_at(objective, &x)?;
        let (dir, newton) = ascent_direction(&hess, &g);

        let mut step = 1.0;
        let mut accepted = None;
        let mut saw_finite = false;
        for _ in 0..=settings.step_halving_max {
            let cand = &x + &dir * step;
            let fc = objective.value(&cand);
            if fc.is_finite() {
                saw_finite = true;
                if fc >= f - ascent_slack(f) {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            if !saw_finite {
                return Err(Error::NonFinite(format!(
                    "objective at every halved step of iteration {iterations}"
                )));
            }
            break;
        };
        let gn = objective.gradient(&xn);
        if !gn.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient at iteration {iterations}")));
        }
        let rel_change = (fnew - f).abs() / (1.0 + f.abs());
        x = xn;
        f = fnew;
        g = gn;
        trace.push(f);
        converged = max_abs(&g) <= settings.tol_grad;
        if let Some(bound) = settings.param_bound {
            if x.iter().any(|v| v.abs() > bound) {
                bound_exceeded = true;
                converged = false;
                break;
            }
        }
        if !converged && !newton && rel_change < settings.tol_loglik {
            break;
        }
    }

    let hessian = hessian_at(objective, &x)?;
    Ok(OptimResult {
        gradient_norm: max_abs(&g),
        parameters: x,
        loglik: f,
        gradient: g,
        hessian,
        converged,
        iterations,
        trace,
        bound_exceeded,
    })
}

fn hessian_at<O: Objective + ?Sized>(objective: &O, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let mut h = match objective.hessian(x) {
        Some(h) => h,
        None => finite_diff_jacobian(|v| objective.gradient(v), x, None)?,
    };
    symmetrize(&mut h);
    if h.iter().all(|v| v.is_finite()) {
        Ok(h)
    } else {
        Err(Error::NonFinite("hessian".into()))
    }
}

/// Newton direction `(-H)⁻¹ g` when `-H` is positive definite. Otherwise
/// `(-H + λI)⁻¹ g` for the smallest λ in a geometric ladder that makes the
/// shifted matrix positive definite, and `g` rescaled to unit max-abs as a
/// last resort. The flag is `true` only for the unshifted Newton step.
fn ascent_direction(hess: &DMatrix<f64>, g: &DVector<f64>) -> (DVector<f64>, bool) {
    let neg = -hess;
    let solve = |m: DMatrix<f64>| m.cholesky().map(|c| c.solve(g)).filter(|d| d.iter().all(|v| v.is_finite()));
    if let Some(d) = solve(neg.clone()) {
        return (d, true);
    }
    let diag_scale = neg.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut lambda = 1e-8 * diag_scale;
    for _ in 0..40 {
        let mut shifted = neg.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += lambda;
        }
        if let Some(d) = solve(shifted) {
            return (d, false);
        }
        lambda *= 10.0;
    }
    let scale = max_abs(g).max(1.0);
    (g / scale, false)
}

/// Default central-difference step for coordinate value `x`.
pub fn default_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + x.abs())
}

/// Central-difference gradient `(f(x+h·eᵢ) − f(x−h·eᵢ)) / 2h`.
///
/// With `h = None` each coordinate uses [`default_step`].
pub fn finite_diff_gradient<F>(f: F, x: &DVector<f64>, h: Option<f64>) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let mut out = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let hi = h.unwrap_or_else(|| default_step(x[i]));
        probe[i] = x[i] + hi;
        let up = f(&probe);
        probe[i] = x[i] - hi;
        let down = f(&probe);
        probe[i] = x[i];
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::NonFinite(format!("function evaluation near coordinate {i}")));
        }
        out[i] = (up - down) / (2.0 * hi);
    }
    Ok(out)
}

/// Central-difference Jacobian of a vector function; column `j` holds the
/// derivative with respect to `x[j]`.
pub fn finite_diff_jacobian<F>(f: F, x: &DVector<f64>, h: Option<f64>) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let base = f(x);
    let mut out = DMatrix::zeros(base.len(), x.len());
    let mut probe = x.clone();
    for j in 0..x.len() {
        let hj = h.unwrap_or_else(|| default_step(x[j]));
        probe[j] = x[j] + hj;
        let up = f(&probe);
        probe[j] = x[j] - hj;
        let down = f(&probe);
        probe[j] = x[j];
        if !(up.iter().chain(down.iter()).all(|v| v.is_finite())) {
            return Err(Error::NonFinite(format!("function evaluation near coordinate {j}")));
        }
        out.set_column(j, &((up - down) / (2.0 * hj)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        center: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn value(&self, x: &DVector<f64>) -> f64 {
            -x.iter().zip(&self.center).map(|(a, c)| (a - c).powi(2)).sum::<f64>()
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_iterator(x.len(), x.iter().zip(&self.center).map(|(a, c)| -2.0 * (a - c)))
        }
    }

    /// Concave but with an indefinite Hessian far from the optimum.
    struct Bumpy;

    impl Objective for Bumpy {
        fn value(&self, x: &DVector<f64>) -> f64 {
            -(x[0].powi(4)) + x[0].powi(2) * 0.5 - (x[1] - 1.0).powi(2)
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(vec![-4.0 * x[0].powi(3) + x[0], -2.0 * (x[1] - 1.0)])
        }
    }

    #[test]
    fn one_dimensional_quadratic() {
        let obj = Quadratic { center: vec![3.0] };
        let r = maximize(&obj, &DVector::from_vec(vec![0.0]), &OptimSettings::default()).unwrap();
        assert!(r.converged);
        assert!((r.parameters[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn two_dimensional_symmetric_bowl() {
        let obj = Quadratic { center: vec![0.0, 0.0] };
        let r = maximize(&obj, &DVector::from_vec(vec![5.0, 5.0]), &OptimSettings::default()).unwrap();
        assert!(r.converged);
        assert!(r.gradient_norm < 1e-6);
        assert!(r.parameters.amax() < 1e-8);
        assert!((r.hessian.clone() - r.hessian.transpose()).amax() < 1e-10);
    }

    #[test]
    fn indefinite_region_falls_back_to_gradient_steps() {
        let r = maximize(&Bumpy, &DVector::from_vec(vec![0.05, -3.0]), &OptimSettings::default())
            .unwrap();
        assert!(r.converged);
        assert!((r.parameters[0].abs() - 0.5).abs() < 1e-6);
        assert!((r.parameters[1] - 1.0).abs() < 1e-8);
        for w in r.trace.windows(2) {
            assert!(w[1] >= w[0] - ascent_slack(w[0]));
        }
    }

    #[test]
    fn non_finite_start_is_an_error() {
        struct Nan;
        impl Objective for Nan {
            fn value(&self, _: &DVector<f64>) -> f64 {
                f64::NAN
            }
            fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
                DVector::zeros(x.len())
            }
        }
        let r = maximize(&Nan, &DVector::from_vec(vec![1.0]), &OptimSettings::default());
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn iteration_cap_is_reported_not_raised() {
        let obj = Bumpy;
        let settings = OptimSettings { max_iterations: 1, ..Default::default() };
        let r = maximize(&obj, &DVector::from_vec(vec![3.0, -3.0]), &settings).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn finite_difference_of_square() {
        let g = finite_diff_gradient(|v| v[0] * v[0], &DVector::from_vec(vec![2.0]), Some(1e-5))
            .unwrap();
        assert!((g[0] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn finite_difference_of_constant_is_zero() {
        let g = finite_diff_gradient(|_| 7.5, &DVector::from_vec(vec![1.0, -2.0, 3.0]), None).unwrap();
        assert_eq!(g, DVector::zeros(3));
    }

    #[test]
    fn finite_difference_flags_non_finite() {
        let r = finite_diff_gradient(|v| v[0].ln(), &DVector::from_vec(vec![0.0]), Some(1e-3));
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn deterministic_results() {
        let a = maximize(&Bumpy, &DVector::from_vec(vec![0.7, 2.0]), &OptimSettings::default()).unwrap();
        let b = maximize(&Bumpy, &DVector::from_vec(vec![0.7, 2.0]), &OptimSettings::default()).unwrap();
        assert_eq!(a, b);
    }
}
