use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fqi::BehaviorPolicy;
use crate::mdp::TrajectoryDataset;

/// How offline confounded data enters the online learner.
#[derive(Debug, Clone, Default)]
pub enum WarmStart {
    /// Plain LSVI-UCB.
    #[default]
    None,
    /// Truncate the optimistic Q by robust upper bounds from the offline data.
    Robust {
        lambda: f64,
        offline: Arc<TrajectoryDataset>,
        /// Marginal behavior propensities used by the robust fit.
        behavior: BehaviorPolicy,
        /// Re-run robust evaluation of the current policy every episode
        /// instead of one robust FQI fit up front.
        per_episode: bool,
    },
    /// Treat the offline transitions as if they had been collected online.
    Naive { offline: Arc<TrajectoryDataset> },
}

impl WarmStart {
    pub fn label(&self) -> &'static str {
        match self {
            WarmStart::None => "none",
            WarmStart::Robust { .. } => "robust",
            WarmStart::Naive { .. } => "naive",
        }
    }
}

/// Settings for [`lsvi_ucb`](super::lsvi_ucb).
#[derive(Debug, Clone)]
pub struct OnlineConfig {
    /// Number of online episodes `K`.
    pub episodes: usize,
    pub horizon: usize,
    /// Bonus width `ξ`.
    pub xi: f64,
    /// Ridge `λ` added to every Gram matrix.
    pub lam: f64,
    pub warmstart: WarmStart,
    pub trials: usize,
    pub seed: u64,
    /// Monte-Carlo rollouts per regret evaluation.
    pub rollouts_per_eval: usize,
    /// Per-step reward bound; every `Q_t` is capped at `T` times this value.
    /// `None` uses the 99.9% quantile of `|R|` under a uniform policy.
    pub reward_bound: Option<f64>,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        Self {
            episodes: 250,
            horizon: 4,
            xi: 0.07,
            lam: 1e-6,
            warmstart: WarmStart::None,
            trials: 50,
            seed: 0,
            rollouts_per_eval: 1000,
            reward_bound: None,
        }
    }
}

impl OnlineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0) || !self.xi.is_finite() {
            return Err(Error::InvalidInput(format!("ξ must be positive, got {}", self.xi)));
        }
        if !(self.lam > 0.0) || !self.lam.is_finite() {
            return Err(Error::InvalidInput(format!("λ must be positive, got {}", self.lam)));
        }
        if self.episodes == 0 || self.horizon == 0 || self.trials == 0 || self.rollouts_per_eval == 0 {
            return Err(Error::InvalidInput(
                "episodes, horizon, trials, and rollouts_per_eval must be positive".into(),
            ));
        }
        if let Some(b) = self.reward_bound {
            if !(b > 0.0) {
                return Err(Error::InvalidInput(format!("reward bound must be positive, got {b}")));
            }
        }
        if let WarmStart::Robust { lambda, .. } = &self.warmstart {
            if !(*lambda >= 1.0) {
                return Err(Error::InvalidInput(format!("Λ must be at least 1, got {lambda}")));
            }
        }
        Ok(())
    }
}
