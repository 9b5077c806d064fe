//! Trajectories, policies, Q-functions, and simulators shared by the offline
//! and online algorithms.

pub mod dataset;
pub mod env;
pub mod policy;
pub mod qfunction;
pub mod sensitivity;

pub use dataset::{TrajectoryDataset, Transition, TransitionBatch};
pub use env::{rollout_return, rollout_value, sample_episodes, Environment, Estimate, SimRng};
pub use policy::{sample_categorical, Policy};
pub use qfunction::{argmax_first, FeatureMap, QFunction};
pub use sensitivity::{SensitivityModel, SetKind};
