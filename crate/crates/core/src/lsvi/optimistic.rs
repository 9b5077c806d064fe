use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mdp::{argmax_first, QFunction, TrajectoryDataset};
use crate::numerics::{dot, spd_inverse, DenseMatrix};

/// Truncated optimistic Q-function of one episode:
/// `Q_t(s, a) = min{θ_{t,a}ᵀφ + ξ(φᵀΣ_{t,a}⁻¹φ)^{1/2}, max{θ_{t,a}ᵀφ, Q̄_t(s, a)}, V_max,t}`
/// with `φ = [s, 1]` inside the block of action `a`. Without an upper bound
/// `Q̄` the middle term is dropped.
#[derive(Debug, Clone)]
pub struct OptimisticQ {
    pub xi: f64,
    /// `θ[t][a] ∈ R^{d+1}`.
    pub theta: Vec<Vec<Vec<f64>>>,
    /// `Σ⁻¹[t][a]`, each `(d+1)×(d+1)`.
    pub sigma_inv: Vec<Vec<DenseMatrix>>,
    pub upper: Option<Arc<QFunction>>,
    /// Cap `V_max,t` per timestep.
    pub cap: Vec<f64>,
}

impl OptimisticQ {
    pub fn horizon(&self) -> usize {
        self.theta.len()
    }

    pub fn num_actions(&self) -> usize {
        self.theta.first().map_or(0, Vec::len)
    }

    fn features(s: &[f64]) -> Vec<f64> {
        let mut phi = Vec::with_capacity(s.len() + 1);
        phi.extend_from_slice(s);
        phi.push(1.0);
        phi
    }

    /// Point estimate `θᵀφ` and bonus `ξ(φᵀΣ⁻¹φ)^{1/2}`.
    pub fn estimate_and_bonus(&self, t: usize, s: &[f64], a: usize) -> (f64, f64) {
        let phi = Self::features(s);
        let inv = &self.sigma_inv[t][a];
        let quad: f64 = (0..phi.len()).map(|i| phi[i] * dot(inv.row(i), &phi)).sum();
        (dot(&self.theta[t][a], &phi), self.xi * quad.max(0.0).sqrt())
    }

    pub fn value(&self, t: usize, s: &[f64], a: usize) -> f64 {
        if t >= self.horizon() {
            return 0.0;
        }
        let (est, bonus) = self.estimate_and_bonus(t, s, a);
        let mut q = (est + bonus).min(self.cap[t]);
        if let Some(upper) = &self.upper {
            q = q.min(est.max(upper.value(t, s, a)));
        }
        q
    }

    pub fn values(&self, t: usize, s: &[f64]) -> Vec<f64> {
        (0..self.num_actions()).map(|a| self.value(t, s, a)).collect()
    }

    pub fn max_value(&self, t: usize, s: &[f64]) -> f64 {
        if t >= self.horizon() {
            return 0.0;
        }
        self.values(t, s).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy_action(&self, t: usize, s: &[f64]) -> usize {
        argmax_first(&self.values(t, s))
    }
}

/// Transitions observed at one timestep, with per-action Gram matrices.
#[derive(Debug, Clone)]
struct StepData {
    states: Vec<f64>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    next_states: Vec<f64>,
    grams: Vec<DenseMatrix>,
}

/// Regression state of one LSVI-UCB run.
#[derive(Debug, Clone)]
pub struct Learner {
    d: usize,
    num_actions: usize,
    xi: f64,
    steps: Vec<StepData>,
}

impl Learner {
    pub fn new(d: usize, num_actions: usize, horizon: usize, xi: f64, lam: f64) -> Self {
        let p = d + 1;
        let mut ridge = DenseMatrix::zeros(p, p);
        for i in 0..p {
            ridge.set(i, i, lam);
        }
        let step = StepData {
            states: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_states: Vec::new(),
            grams: vec![ridge; num_actions],
        };
        Self {
            d,
            num_actions,
            xi,
            steps: vec![step; horizon],
        }
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    /// Number of stored transitions at step `t`.
    pub fn count(&self, t: usize) -> usize {
        self.steps[t].actions.len()
    }

    pub fn push(&mut self, t: usize, s: &[f64], a: usize, r: f64, sp: &[f64]) -> Result<()> {
        if s.len() != self.d || sp.len() != self.d {
            return Err(Error::Dimension {
                context: "Learner::push: state",
                expected: self.d,
                actual: s.len().max(sp.len()),
            });
        }
        if a >= self.num_actions {
            return Err(Error::InvalidInput(format!(
                "action {a} outside 0..{}",
                self.num_actions
            )));
        }
        let step = &mut self.steps[t];
        step.states.extend_from_slice(s);
        step.actions.push(a);
        step.rewards.push(r);
        step.next_states.extend_from_slice(sp);
        let g = &mut step.grams[a];
        let p = self.d + 1;
        for i in 0..p {
            let xi = if i < self.d { s[i] } else { 1.0 };
            for j in 0..p {
                let xj = if j < self.d { s[j] } else { 1.0 };
                g.set(i, j, g.get(i, j) + xi * xj);
            }
        }
        Ok(())
    }

    /// Adds every transition of `ds` as if it had been observed online.
    pub fn push_dataset(&mut self, ds: &TrajectoryDataset) -> Result<()> {
        if ds.horizon() != self.horizon() || ds.num_actions() != self.num_actions {
            return Err(Error::InvalidInput(
                "offline data does not match the online horizon and actions".into(),
            ));
        }
        for i in 0..ds.len() {
            for t in 0..ds.horizon() {
                self.push(t, ds.state(i, t), ds.action(i, t), ds.reward(i, t), ds.state(i, t + 1))?;
            }
        }
        Ok(())
    }

    /// Backward least-squares value iteration on the stored data.
    pub fn plan(&self, upper: Option<Arc<QFunction>>, cap: &[f64]) -> Result<OptimisticQ> {
        let (horizon, p, na) = (self.horizon(), self.d + 1, self.num_actions);
        let mut q = OptimisticQ {
            xi: self.xi,
            theta: vec![vec![vec![0.0; p]; na]; horizon],
            sigma_inv: vec![vec![DenseMatrix::identity(p); na]; horizon],
            upper,
            cap: cap.to_vec(),
        };
        for t in (0..horizon).rev() {
            let step = &self.steps[t];
            let mut rhs = vec![vec![0.0; p]; na];
            for (k, &a) in step.actions.iter().enumerate() {
                let sp = &step.next_states[k * self.d..(k + 1) * self.d];
                let y = step.rewards[k] + q.max_value(t + 1, sp);
                let s = &step.states[k * self.d..(k + 1) * self.d];
                let row = &mut rhs[a];
                for (r, x) in row.iter_mut().zip(s) {
                    *r += x * y;
                }
                row[self.d] += y;
            }
            for a in 0..na {
                let inv = spd_inverse(&step.grams[a])
                    .ok_or_else(|| Error::Domain(format!("Gram matrix at t={t}, a={a} is not positive definite")))?;
                q.theta[t][a] = inv.matvec(&rhs[a])?;
                q.sigma_inv[t][a] = inv;
            }
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_learner_is_pure_bonus() {
        let (xi, lam) = (0.07, 1e-6);
        let learner = Learner::new(2, 2, 1, xi, lam);
        let q = learner.plan(None, &[1e9]).unwrap();
        let s = [0.3, -0.4];
        // φ = [0.3, −0.4, 1], Σ = λI, bonus = ξ‖φ‖/√λ
        let expect = xi * (0.09f64 + 0.16 + 1.0).sqrt() / lam.sqrt();
        assert!((q.value(0, &s, 1) - expect).abs() < 1e-9 * expect);
        let capped = learner.plan(None, &[4.0]).unwrap();
        assert_eq!(capped.value(0, &s, 0), 4.0);
    }

    #[test]
    fn well_sampled_action_recovers_least_squares() {
        let mut learner = Learner::new(1, 1, 1, 0.07, 1e-6);
        for i in 0..200 {
            let s = [i as f64 / 100.0 - 1.0];
            learner.push(0, &s, 0, 2.0 * s[0] + 1.0, &[0.0]).unwrap();
        }
        let q = learner.plan(None, &[100.0]).unwrap();
        let (est, bonus) = q.estimate_and_bonus(0, &[0.5], 0);
        assert!((est - 2.0).abs() < 1e-6);
        assert!(bonus < 0.07 * 0.2);
    }
}
