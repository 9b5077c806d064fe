use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::qfunction::QFunction;

type ProbFn = dyn Fn(usize, &[f64]) -> Vec<f64> + Send + Sync;
type MapFn = dyn Fn(usize, &[f64]) -> usize + Send + Sync;

/// A (possibly time-dependent) decision rule over `num_actions` actions.
#[derive(Clone)]
pub enum Policy {
    Greedy(Arc<QFunction>),
    Uniform {
        num_actions: usize,
    },
    /// Per-step action probabilities as a function of `(t, s)`.
    Stochastic {
        num_actions: usize,
        probs: Arc<ProbFn>,
    },
    /// Deterministic map `(t, s) ↦ a`.
    Fixed {
        num_actions: usize,
        map: Arc<MapFn>,
    },
}

impl fmt::Debug for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Greedy(q) => write!(f, "Greedy(T={}, A={})", q.horizon(), q.num_actions()),
            Policy::Uniform { num_actions } => write!(f, "Uniform({num_actions})"),
            Policy::Stochastic { num_actions, .. } => write!(f, "Stochastic({num_actions})"),
            Policy::Fixed { num_actions, .. } => write!(f, "Fixed({num_actions})"),
        }
    }
}

impl Policy {
    pub fn greedy(q: QFunction) -> Self {
        Policy::Greedy(Arc::new(q))
    }

    pub fn stochastic(num_actions: usize, f: impl Fn(usize, &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Policy::Stochastic {
            num_actions,
            probs: Arc::new(f),
        }
    }

    pub fn fixed(num_actions: usize, f: impl Fn(usize, &[f64]) -> usize + Send + Sync + 'static) -> Self {
        Policy::Fixed {
            num_actions,
            map: Arc::new(f),
        }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            Policy::Greedy(q) => q.num_actions(),
            Policy::Uniform { num_actions }
            | Policy::Stochastic { num_actions, .. }
            | Policy::Fixed { num_actions, .. } => *num_actions,
        }
    }

    /// Action distribution at `(t, s)`.
    pub fn probabilities(&self, t: usize, s: &[f64]) -> Vec<f64> {
        let k = self.num_actions();
        match self {
            Policy::Greedy(q) => one_hot(q.greedy_action(t, s), k),
            Policy::Uniform { .. } => vec![1.0 / k as f64; k],
            Policy::Stochastic { probs, .. } => probs(t, s),
            Policy::Fixed { map, .. } => one_hot(map(t, s), k),
        }
    }

    /// Draws an action; deterministic kinds consume no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, t: usize, s: &[f64], rng: &mut R) -> usize {
        match self {
            Policy::Greedy(q) => q.greedy_action(t, s),
            Policy::Fixed { map, .. } => map(t, s),
            Policy::Uniform { num_actions } => rng.random_range(0..*num_actions),
            Policy::Stochastic { probs, .. } => sample_categorical(&probs(t, s), rng),
        }
    }
}

fn one_hot(a: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    v[a] = 1.0;
    v
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return a;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
