//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use mzipmed_core::mediation::params::{Contrast, ParamLayout};
use mzipmed_core::mediation::params::{effect_gradients, effect_values};
use mzipmed_core::mediation::{effects_at, MediatorType, Scale};
use mzipmed_core::mzip::{mzip_loglik, mzip_score};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;

/// Gauss–Hermite nodes and weights for `∫ e^{−t²} g(t) dt` by the
/// Golub–Welsch eigenvalue method.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Unpacked model parameters, kept separate from the crate's flat layout.
#[derive(Debug, Clone)]
pub struct Truth {
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub sigma2: f64,
    pub interaction: bool,
}

impl Truth {
    fn alpha_cov(&self) -> &[f64] {
        &self.alpha[if self.interaction { 4 } else { 3 }..]
    }

    /// `E[Y | x, m, c]` for the MZIP overall mean.
    pub fn cond_mean(&self, x: f64, m: f64, c: &[f64]) -> f64 {
        let a3 = if self.interaction { self.alpha[3] } else { 0.0 };
        let cov: f64 = self.alpha_cov().iter().zip(c).map(|(a, v)| a * v).sum();
        (self.alpha[0] + self.alpha[1] * x + self.alpha[2] * m + a3 * x * m + cov).exp()
    }

    pub fn mediator_lp(&self, x: f64, c: &[f64]) -> f64 {
        self.theta[0] + self.theta[1] * x + self.theta[2..].iter().zip(c).map(|(a, v)| a * v).sum::<f64>()
    }

    /// `E[Y_{x, M_{xm}} | c]` by Gauss–Hermite integration over a normal mediator.
    pub fn cf_mean_quadrature(&self, x: f64, xm: f64, c: &[f64], nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
        let mean = self.mediator_lp(xm, c);
        let scale = (2.0 * self.sigma2).sqrt();
        let s: f64 = nodes.0.iter().zip(&nodes.1).map(|(t, w)| w * self.cond_mean(x, mean + scale * t, c)).sum();
        s / std::f64::consts::PI.sqrt()
    }

    /// `E[Y_{x, M_{xm}} | c]` by summing over a binary mediator.
    pub fn cf_mean_enumeration(&self, x: f64, xm: f64, c: &[f64]) -> f64 {
        let p1 = 1.0 / (1.0 + (-self.mediator_lp(xm, c)).exp());
        self.cond_mean(x, 1.0, c) * p1 + self.cond_mean(x, 0.0, c) * (1.0 - p1)
    }

    pub fn layout(&self, mediator: MediatorType) -> ParamLayout {
        ParamLayout { n_cov: self.theta.len() - 2, interaction: self.interaction, mediator }
    }

    pub fn flat(&self, mediator: MediatorType) -> DVector<f64> {
        let s2 = (mediator == MediatorType::Continuous).then_some(self.sigma2);
        self.layout(mediator).pack(&self.theta, &self.alpha, s2).unwrap()
    }
}

/// NDE, NIE and TE on the natural (IRR or RD) scale from counterfactual means.
pub fn effects_from_means(e_xx: f64, e_xs: f64, e_ss: f64, ratio: bool) -> [f64; 3] {
    if ratio {
        [e_xs / e_ss, e_xx / e_xs, e_xx / e_ss]
    } else {
        [e_xs - e_ss, e_xx - e_xs, e_xx - e_ss]
    }
}

pub fn contrast(x: f64, x_star: f64, c: Vec<f64>, m_cde: f64) -> Contrast {
    Contrast { x, x_star, c, m_cde }
}

/// Central difference with a step scaled to the coordinate.
pub fn central_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    let mut probe = x.clone();
    DVector::from_fn(x.len(), |i, _| {
        let h = 1e-5 * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        (up - down) / (2.0 * h)
    })
}

/// Largest `|a − b| / max(1, |a|)` over components.
pub fn max_rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs() / u.abs().max(1.0)).fold(0.0, f64::max)
}

/// `|a − b| ≤ tol · max(1, |a|, |b|)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Random model parameters with `n_cov` covariates.
pub fn truth_strategy(interaction: bool) -> impl Strategy<Value = Truth> {
    (0usize..=2).prop_flat_map(move |k| {
        (
            (-1.0..1.0f64, -1.5..1.5f64, prop::collection::vec(-0.5..0.5f64, k)),
            (-1.0..1.0f64, -1.0..1.0f64, -0.8..0.8f64, -0.5..0.5f64, prop::collection::vec(-0.5..0.5f64, k)),
            0.2..3.0f64,
        )
            .prop_map(move |((t0, t1, tc), (a0, a1, a2, a3, ac), sigma2)| {
                let mut theta = vec![t0, t1];
                theta.extend(tc);
                let mut alpha = vec![a0, a1, a2];
                if interaction {
                    alpha.push(a3);
                }
                alpha.extend(ac);
                Truth { theta, alpha, sigma2, interaction }
            })
    })
}

/// Exposure levels, covariate point of the right length, and a CDE mediator level.
pub fn contrast_strategy(n_cov: usize) -> impl Strategy<Value = Contrast> {
    (-1.0..2.0f64, -1.0..2.0f64, prop::collection::vec(0.0..4.0f64, n_cov), -2.0..2.0f64)
        .prop_map(|(x, x_star, c, m)| Contrast { x, x_star, c, m_cde: m })
}

/// Parameters paired with a matching contrast.
pub fn case_strategy(interaction: bool) -> impl Strategy<Value = (Truth, Contrast)> {
    truth_strategy(interaction).prop_flat_map(|t| {
        let k = t.theta.len() - 2;
        (Just(t), contrast_strategy(k))
    })
}

/// Either interaction setting.
pub fn any_case() -> impl Strategy<Value = (Truth, Contrast)> {
    prop_oneof![case_strategy(false), case_strategy(true)]
}

pub type Check = Result<(), String>;

fn close3(got: [f64; 3], want: [f64; 3], tol: f64) -> Check {
    for (name, (g, w)) in ["NDE", "NIE", "TE"].iter().zip(got.iter().zip(want)) {
        if !rel_close(*g, w, tol) {
            return Err(format!("{name}: closed form {g} vs oracle {w}"));
        }
    }
    Ok(())
}

/// Continuous-mediator closed forms against Gauss–Hermite quadrature.
pub fn check_continuous_oracle(t: &Truth, k: &Contrast, scale: Scale, tol: f64) -> Check {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let nodes = NODES.get_or_init(|| gauss_hermite(80));
    let e_xx = t.cf_mean_quadrature(k.x, k.x, &k.c, nodes);
    let e_xs = t.cf_mean_quadrature(k.x, k.x_star, &k.c, nodes);
    let e_ss = t.cf_mean_quadrature(k.x_star, k.x_star, &k.c, nodes);
    let want = effects_from_means(e_xx, e_xs, e_ss, scale == Scale::Ratio);
    let got = effects_at(t.layout(MediatorType::Continuous), &t.flat(MediatorType::Continuous), k, scale)
        .map_err(|e| e.to_string())?;
    close3([got.nde.estimate, got.nie.estimate, got.te.estimate], want, tol)
}

/// Binary-mediator closed forms against summation over `M ∈ {0, 1}`.
pub fn check_binary_oracle(t: &Truth, k: &Contrast, scale: Scale, tol: f64) -> Check {
    let e_xx = t.cf_mean_enumeration(k.x, k.x, &k.c);
    let e_xs = t.cf_mean_enumeration(k.x, k.x_star, &k.c);
    let e_ss = t.cf_mean_enumeration(k.x_star, k.x_star, &k.c);
    let want = effects_from_means(e_xx, e_xs, e_ss, scale == Scale::Ratio);
    let got = effects_at(t.layout(MediatorType::Binary), &t.flat(MediatorType::Binary), k, scale)
        .map_err(|e| e.to_string())?;
    close3([got.nde.estimate, got.nie.estimate, got.te.estimate], want, tol)
}

/// Design with an intercept and `p − 1` uniform columns, and zero-heavy counts.
pub fn score_problem(n: usize, p: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { rng.random_range(-1.5..1.5) });
    let y = DVector::from_fn(n, |_, _| if rng.random_bool(0.5) { 0.0 } else { f64::from(rng.random_range(0u8..6)) });
    (z, y)
}

/// MZIP analytic score against central differences of the log-likelihood.
pub fn check_score(n: usize, p: usize, seed: u64, params: &[f64], tol: f64) -> Check {
    let (z, y) = score_problem(n, p, seed);
    let gamma = DVector::from_column_slice(&params[..p]);
    let alpha = DVector::from_column_slice(&params[p..]);
    let analytic = mzip_score(&alpha, &gamma, &z, &y).map_err(|e| e.to_string())?;
    let numeric = central_gradient(
        |v| {
            let g = DVector::from_column_slice(&v.as_slice()[..p]);
            let a = DVector::from_column_slice(&v.as_slice()[p..]);
            mzip_loglik(&a, &g, &z, &y).unwrap_or(f64::NAN)
        },
        &DVector::from_column_slice(params),
    );
    let err = max_rel_err(&analytic, &numeric);
    if err < tol {
        Ok(())
    } else {
        Err(format!("n={n} p={p}: score rel err {err}"))
    }
}

/// Strategy for a seed and a `(γ, α)` point of a `p`-column design.
pub fn score_point(p: usize) -> impl Strategy<Value = (u64, Vec<f64>)> {
    (any::<u64>(), prop::collection::vec(-0.8..0.8f64, 2 * p))
}

/// Exact effect gradients against central differences of the effect values.
pub fn check_gamma_vectors(t: &Truth, k: &Contrast, mediator: MediatorType, scale: Scale, tol: f64) -> Check {
    let layout = t.layout(mediator);
    let p = t.flat(mediator);
    let g = effect_gradients(layout, &p, k, scale).map_err(|e| e.to_string())?;
    for (which, analytic) in [&g.nde, &g.nie, &g.cde, &g.te].into_iter().enumerate() {
        let numeric = central_gradient(
            |v| {
                let e = effect_values(layout, v, k, scale).unwrap();
                [e.nde, e.nie, e.cde, e.te][which]
            },
            &p,
        );
        let err = max_rel_err(analytic, &numeric);
        if err >= tol {
            return Err(format!("{mediator:?} {scale:?} effect {which}: gradient rel err {err}"));
        }
    }
    Ok(())
}
