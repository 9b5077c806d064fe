use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{Policy, QFunction, SensitivityModel};
use crate::numerics::FitConfig;
use crate::robust::Bound;

/// Source of the marginal behavior propensities `π^b(a | s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorPolicy {
    /// State-independent probabilities known from the data-generating process.
    Known(Vec<f64>),
    /// Multinomial logistic regression of actions on states, per timestep.
    Fit,
}

/// Settings shared by the robust fitted-Q estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FqiConfig {
    pub sensitivity: SensitivityModel,
    pub gamma: f64,
    pub orthogonal: bool,
    pub bound: Bound,
    pub behavior_policy: BehaviorPolicy,
    /// Lasso settings for the Q regression.
    pub mean_fit: FitConfig,
    /// L1 quantile regression settings for the conditional quantile.
    pub quantile_fit: FitConfig,
    /// L2 penalty for the behavior-policy classifier when it is estimated.
    #[serde(default = "default_behavior_penalty")]
    pub behavior_penalty: f64,
    /// Number of cross-fitting folds; 1 disables sample splitting.
    pub crossfit_folds: usize,
    /// Seed for the fold assignment.
    #[serde(default)]
    pub seed: u64,
}

fn default_behavior_penalty() -> f64 {
    1e-3
}

impl Default for FqiConfig {
    fn default() -> Self {
        Self {
            sensitivity: SensitivityModel {
                lambda: 1.0,
                set_kind: Default::default(),
            },
            gamma: 1.0,
            orthogonal: true,
            bound: Bound::Lower,
            behavior_policy: BehaviorPolicy::Fit,
            mean_fit: FitConfig::with_penalty(1e-4),
            quantile_fit: FitConfig::with_penalty(1e-2),
            behavior_penalty: default_behavior_penalty(),
            crossfit_folds: 1,
            seed: 0,
        }
    }
}

impl FqiConfig {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.sensitivity.lambda = lambda;
        self
    }

    pub fn validate(&self, num_actions: usize) -> Result<()> {
        self.sensitivity.validate()?;
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidInput(format!("γ must lie in (0, 1], got {}", self.gamma)));
        }
        self.mean_fit.validate()?;
        self.quantile_fit.validate()?;
        if self.crossfit_folds == 0 {
            return Err(Error::InvalidInput("crossfit_folds must be at least 1".into()));
        }
        if let BehaviorPolicy::Known(p) = &self.behavior_policy {
            if p.len() != num_actions {
                return Err(Error::Dimension {
                    context: "known behavior policy",
                    expected: num_actions,
                    actual: p.len(),
                });
            }
            if p.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
                return Err(Error::InvalidInput(
                    "known behavior probabilities must lie in (0, 1]".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Per-run diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Messages about empty action strata and non-converged fits.
    pub warnings: Vec<String>,
    /// Mean regression target per timestep (or per iteration in the stationary case).
    pub mean_target: Vec<f64>,
    /// RMS change of the fitted Q on the data per iteration (stationary case only).
    pub iterate_change: Vec<f64>,
}

/// Fitted Q-function, its greedy policy, and diagnostics.
#[derive(Debug, Clone)]
pub struct FqiResult {
    pub q: QFunction,
    pub policy: Policy,
    pub diagnostics: Diagnostics,
}

impl FqiResult {
    pub(crate) fn new(q: QFunction, diagnostics: Diagnostics) -> Self {
        let policy = Policy::greedy(q.clone());
        Self { q, policy, diagnostics }
    }
}
