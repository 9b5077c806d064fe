use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::linear_gaussian::LinearGaussianEnv;
use crate::error::{Error, Result};
use crate::mdp::{argmax_first, FeatureMap, QFunction};
use crate::numerics::{cholesky, cholesky_solve, dot, DenseMatrix, LinearModel};
use crate::robust::c_lambda;
use crate::seeding::rng_for;

/// Default number of initial-state draws for the linearization.
pub const DEFAULT_LINEARIZATION_SAMPLES: usize = 200_000;

/// Linear robust optimal Q-function of a [`LinearGaussianEnv`].
///
/// `Q̄*_t(s, a) = v_tᵀ s + c_{t,a}`, with the slope shared by both actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub lambda: f64,
    /// Number of initial-state draws used to linearize the std term.
    pub m: usize,
    pub slopes: Vec<Vec<f64>>,
    pub intercepts: Vec<Vec<f64>>,
    /// Optimal action per timestep; it does not depend on the state.
    pub optimal_actions: Vec<usize>,
}

impl GroundTruth {
    pub fn horizon(&self) -> usize {
        self.slopes.len()
    }

    pub fn q_value(&self, t: usize, s: &[f64], a: usize) -> f64 {
        dot(&self.slopes[t], s) + self.intercepts[t][a]
    }

    /// `V̄*_t(s) = max_a Q̄*_t(s, a)`.
    pub fn value(&self, t: usize, s: &[f64]) -> f64 {
        dot(&self.slopes[t], s) + self.intercepts[t][self.optimal_actions[t]]
    }

    /// The oracle as a per-action [`QFunction`].
    pub fn to_qfunction(&self) -> Result<QFunction> {
        let d = self.slopes.first().map_or(0, Vec::len);
        let models = self
            .slopes
            .iter()
            .zip(&self.intercepts)
            .map(|(v, cs)| cs.iter().map(|&c| LinearModel::new(v.clone(), c)).collect())
            .collect();
        QFunction::new(FeatureMap::RawStatePerAction, models, d)
    }
}

/// Initial-state draws and the affine least-squares design shared by every
/// timestep and every `Λ` of one environment.
struct Linearizer {
    d: usize,
    draws: Vec<f64>,
    raw_std: Vec<f64>,
    chol: DenseMatrix,
}

impl Linearizer {
    fn new(env: &LinearGaussianEnv, m: usize, seed: u64) -> Result<Self> {
        let d = env.d;
        if m <= d {
            return Err(Error::InvalidInput(format!(
                "need more than d = {d} linearization draws, got {m}"
            )));
        }
        let mut rng = rng_for(seed, 0x7472_7574);
        let draws: Vec<f64> = (0..m * d)
            .map(|_| env.init_std * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut raw_std = Vec::with_capacity(m * d);
        let mut gram = DenseMatrix::zeros(d + 1, d + 1);
        for x in draws.chunks_exact(d) {
            raw_std.extend(env.conditional_std(x));
            for i in 0..=d {
                let xi = if i < d { x[i] } else { 1.0 };
                for j in 0..=i {
                    let xj = if j < d { x[j] } else { 1.0 };
                    gram.set(i, j, gram.get(i, j) + xi * xj);
                }
            }
        }
        for i in 0..=d {
            for j in 0..i {
                gram.set(j, i, gram.get(i, j));
            }
        }
        let chol = cholesky(&gram).ok_or_else(|| Error::Domain("singular linearization design".into()))?;
        Ok(Self {
            d,
            draws,
            raw_std,
            chol,
        })
    }

    /// Affine least-squares fit `(g, h)` of `s ↦ (Σ_i w_i² std_i(s)²)^{1/2}`.
    fn fit_std(&self, w: &[f64]) -> (Vec<f64>, f64) {
        let d = self.d;
        let mut rhs = vec![0.0; d + 1];
        for (x, sdv) in self.draws.chunks_exact(d).zip(self.raw_std.chunks_exact(d)) {
            let sd = w.iter().zip(sdv).map(|(wi, si)| (wi * si).powi(2)).sum::<f64>().sqrt();
            for i in 0..d {
                rhs[i] += x[i] * sd;
            }
            rhs[d] += sd;
        }
        let mut coef = cholesky_solve(&self.chol, &rhs);
        let h = coef.pop().unwrap_or(0.0);
        (coef, h)
    }
}

/// Robust optimal Q of `env` at sensitivity `lambda` by backward recursion.
///
/// With `w = θ_R + γ v_{t+1}`, the next-step target is Gaussian given
/// `(s, a)` with mean `wᵀ(θ_μ s + θ_A a·1) + γ max_a c_{t+1,a}` and standard
/// deviation `sd(s) = (Σ_i w_i² max(θ_σ s + σ, 0)_i²)^{1/2}`; the lower robust
/// backup subtracts `(1 − π^b)·C(Λ)·sd(s)` with `π^b = 0.5`. The nonlinear
/// `sd(s)` is replaced by its least-squares affine fit over `m` draws from the
/// initial distribution, which keeps every `Q̄*_t` affine.
pub fn ground_truth(env: &LinearGaussianEnv, lambda: f64, m: usize, seed: u64) -> Result<GroundTruth> {
    ground_truth_grid(env, &[lambda], m, seed).map(|mut v| v.remove(0))
}

/// [`ground_truth`] for several `Λ`, sharing one set of linearization draws.
pub fn ground_truth_grid(env: &LinearGaussianEnv, lambdas: &[f64], m: usize, seed: u64) -> Result<Vec<GroundTruth>> {
    if env.behavior_p1 != 0.5 {
        return Err(Error::InvalidInput(
            "the affine oracle needs π^b(1) = 0.5 so both actions share the std penalty".into(),
        ));
    }
    let cs = lambdas.iter().map(|&l| c_lambda(l)).collect::<Result<Vec<_>>>()?;
    let lin = Linearizer::new(env, m, seed)?;
    lambdas
        .iter()
        .zip(cs)
        .map(|(&lambda, c)| recursion(env, &lin, lambda, c, m))
        .collect::<Result<Vec<_>>>()
}

fn recursion(env: &LinearGaussianEnv, lin: &Linearizer, lambda: f64, c: f64, m: usize) -> Result<GroundTruth> {
    let d = env.d;
    let horizon = env.horizon;
    let penalty = (1.0 - env.behavior_p1) * c;
    let mut slopes = vec![Vec::new(); horizon];
    let mut intercepts = vec![Vec::new(); horizon];
    let mut optimal_actions = vec![0; horizon];
    let mut v_next = vec![0.0; d];
    let mut c_next = 0.0;
    for t in (0..horizon).rev() {
        let w: Vec<f64> = env
            .theta_r
            .iter()
            .zip(&v_next)
            .map(|(r, v)| r + env.gamma * v)
            .collect();
        let (g, h) = if penalty == 0.0 {
            (vec![0.0; d], 0.0)
        } else {
            lin.fit_std(&w)
        };
        let bw = env.theta_mu.t_matvec(&w)?;
        let w_sum: f64 = w.iter().sum();
        let v_t: Vec<f64> = bw.iter().zip(&g).map(|(b, gi)| b - penalty * gi).collect();
        let cs: Vec<f64> = (0..2)
            .map(|a| env.theta_a * a as f64 * w_sum + env.gamma * c_next - penalty * h)
            .collect();
        let best = argmax_first(&cs);
        optimal_actions[t] = best;
        c_next = cs[best];
        slopes[t] = v_t.clone();
        intercepts[t] = cs;
        v_next = v_t;
    }
    Ok(GroundTruth {
        lambda,
        m,
        slopes,
        intercepts,
        optimal_actions,
    })
}
