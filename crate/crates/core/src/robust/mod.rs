//! Per-sample robust Bellman targets under the marginal sensitivity model.

pub mod bounds;
pub mod counterexample;
pub mod gaussian;
pub mod lp;
pub mod targets;

pub use bounds::{msm_bound_pair, msm_bounds, MsmBounds};
pub use counterexample::{counterexample_check, realizable_assignment};
pub use gaussian::{c_lambda, gaussian_robust_target};
pub use lp::{lp_oracle, LpSolution};
pub use targets::{empirical_quantile, nominal_targets, orthogonal_targets, plugin_targets, Bound, NominalMode};
