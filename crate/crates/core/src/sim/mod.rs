//! Simulators: the heteroskedastic linear-Gaussian offline environments with
//! their analytic robust oracle, the confounded warm-start environment, the
//! scalar AR(1) process, and small tabular MDPs.

pub mod ar1;
pub mod confounded;
pub mod ground_truth;
pub mod linear_gaussian;
pub mod tabular;

pub use ar1::{ar1_beta, ar1_robust_gap, Ar1Env, Ar1Gap};
pub use confounded::{
    behavior_prob, build_confounded_env, build_warmstart_env, sample_confounded, sample_with_policy, ConfoundedEnv,
    ConfoundedEnvSpec,
};
pub use ground_truth::{ground_truth, ground_truth_grid, GroundTruth, DEFAULT_LINEARIZATION_SAMPLES};
pub use linear_gaussian::{
    build_highdim_env, build_lowdim_env, build_lowdim_env_with_dim, sample_offline, LinearGaussianEnv, SampleMode,
};
pub use tabular::{one_hot, two_state_mdp, TabularMdp};
