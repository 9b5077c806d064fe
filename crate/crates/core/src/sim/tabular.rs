use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::mdp::{argmax_first, sample_categorical, Environment, SimRng, TransitionBatch};
use crate::numerics::DenseMatrix;

/// Finite MDP whose states are observed as one-hot vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularMdp {
    /// `p[s][a][s']`.
    pub p: Vec<Vec<Vec<f64>>>,
    /// Deterministic reward `r[s][a]`.
    pub r: Vec<Vec<f64>>,
    /// Initial state distribution.
    pub init: Vec<f64>,
    pub gamma: f64,
    pub horizon: usize,
}

pub fn one_hot(s: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[s] = 1.0;
    v
}

fn state_index(x: &[f64]) -> usize {
    argmax_first(x)
}

impl TabularMdp {
    pub fn new(p: Vec<Vec<Vec<f64>>>, r: Vec<Vec<f64>>, init: Vec<f64>, gamma: f64, horizon: usize) -> Result<Self> {
        let ns = p.len();
        if ns == 0 || p[0].is_empty() {
            return Err(Error::InvalidInput("tabular MDP needs states and actions".into()));
        }
        let na = p[0].len();
        check_dim("TabularMdp: reward states", ns, r.len())?;
        check_dim("TabularMdp: initial distribution", ns, init.len())?;
        for (ps, rs) in p.iter().zip(&r) {
            check_dim("TabularMdp: actions", na, ps.len())?;
            check_dim("TabularMdp: reward actions", na, rs.len())?;
            for row in ps {
                check_dim("TabularMdp: next states", ns, row.len())?;
                if (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 || row.iter().any(|&q| q < 0.0) {
                    return Err(Error::InvalidInput(
                        "transition rows must be probability vectors".into(),
                    ));
                }
            }
        }
        Ok(Self {
            p,
            r,
            init,
            gamma,
            horizon,
        })
    }

    pub fn num_states(&self) -> usize {
        self.p.len()
    }

    /// Finite-horizon optimal `Q*_t[s][a]` for `t = 0..T−1`.
    pub fn finite_horizon_q(&self) -> Vec<Vec<Vec<f64>>> {
        let ns = self.num_states();
        let mut q = vec![Vec::new(); self.horizon];
        let mut v = vec![0.0; ns];
        for t in (0..self.horizon).rev() {
            q[t] = self.backup(&v);
            v = q[t]
                .iter()
                .map(|qs| qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .collect();
        }
        q
    }

    fn backup(&self, v: &[f64]) -> Vec<Vec<f64>> {
        self.p
            .iter()
            .zip(&self.r)
            .map(|(ps, rs)| {
                ps.iter()
                    .zip(rs)
                    .map(|(row, r)| r + self.gamma * row.iter().zip(v).map(|(p, vv)| p * vv).sum::<f64>())
                    .collect()
            })
            .collect()
    }

    /// Discounted optimal `Q*[s][a]` by value iteration to `tol` (needs `γ < 1`).
    pub fn discounted_q(&self, tol: f64) -> Result<Vec<Vec<f64>>> {
        if !(self.gamma < 1.0) {
            return Err(Error::InvalidInput("value iteration needs γ < 1".into()));
        }
        let mut v = vec![0.0; self.num_states()];
        loop {
            let q = self.backup(&v);
            let nv: Vec<f64> = q
                .iter()
                .map(|qs| qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            let delta = nv.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = nv;
            if delta < tol * (1.0 - self.gamma) {
                return Ok(self.backup(&v));
            }
        }
    }

    /// Stationary tuples covering every `(s, a)` `copies` times with next
    /// states in exact proportion to `p` (probabilities must be multiples of `1/copies`).
    pub fn exact_batch(&self, copies: usize) -> Result<TransitionBatch> {
        let ns = self.num_states();
        let mut states = Vec::new();
        let mut actions = Vec::new();
        let mut rewards = Vec::new();
        let mut next = Vec::new();
        for s in 0..ns {
            for (a, row) in self.p[s].iter().enumerate() {
                for (sp, &prob) in row.iter().enumerate() {
                    let k = prob * copies as f64;
                    if (k - k.round()).abs() > 1e-9 {
                        return Err(Error::InvalidInput(format!(
                            "P({sp} | {s}, {a}) = {prob} is not a multiple of 1/{copies}"
                        )));
                    }
                    for _ in 0..k.round() as usize {
                        states.push(one_hot(s, ns));
                        actions.push(a);
                        rewards.push(self.r[s][a]);
                        next.push(one_hot(sp, ns));
                    }
                }
            }
        }
        Ok(TransitionBatch {
            states: DenseMatrix::from_rows(&states)?,
            actions,
            rewards,
            next_states: DenseMatrix::from_rows(&next)?,
        })
    }
}

impl Environment for TabularMdp {
    fn state_dim(&self) -> usize {
        self.num_states()
    }

    fn num_actions(&self) -> usize {
        self.p[0].len()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn initial_state(&self, rng: &mut SimRng) -> Vec<f64> {
        one_hot(sample_categorical(&self.init, rng), self.num_states())
    }

    fn step(&self, _t: usize, s: &[f64], a: usize, rng: &mut SimRng) -> (f64, Vec<f64>) {
        let si = state_index(s);
        // Draw unconditionally so common random numbers stay aligned across policies.
        let u: f64 = rng.random();
        let row = &self.p[si][a];
        let mut acc = 0.0;
        let mut sp = row.len() - 1;
        for (j, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                sp = j;
                break;
            }
        }
        (self.r[si][a], one_hot(sp, self.num_states()))
    }
}

/// Two states, two actions: action 1 in state 0 pays 1 and moves to state 1
/// with probability 1/2; state 1 pays 2 for staying (action 0) and 0 for
/// resetting (action 1, back to state 0).
pub fn two_state_mdp(gamma: f64, horizon: usize) -> TabularMdp {
    TabularMdp::new(
        vec![
            vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            vec![vec![0.25, 0.75], vec![1.0, 0.0]],
        ],
        vec![vec![0.0, 1.0], vec![2.0, 0.0]],
        vec![1.0, 0.0],
        gamma,
        horizon,
    )
    .expect("valid tabular MDP")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discounted_q_is_a_bellman_fixed_point() {
        let m = two_state_mdp(0.8, 1);
        let q = m.discounted_q(1e-13).unwrap();
        let v: Vec<f64> = q.iter().map(|r| r[0].max(r[1])).collect();
        let again = m.backup(&v);
        for (a, b) in q.iter().flatten().zip(again.iter().flatten()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn exact_batch_has_exact_frequencies() {
        let m = two_state_mdp(0.8, 1);
        let b = m.exact_batch(4).unwrap();
        assert_eq!(b.len(), 16);
        let moved = (0..b.len())
            .filter(|&i| b.actions[i] == 1 && b.states.get(i, 0) == 1.0 && b.next_states.get(i, 1) == 1.0)
            .count();
        assert_eq!(moved, 2);
        assert!(m.exact_batch(3).is_err());
    }
}
