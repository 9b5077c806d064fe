//! Robust fitted-Q iteration and evaluation, finite-horizon and discounted.

mod config;
mod finite;
mod infinite;
mod step;

pub use config::{BehaviorPolicy, Diagnostics, FqiConfig, FqiResult};
pub use finite::{nominal_fqi, robust_fqe, robust_fqi, robust_fqi_crossfit};
pub use infinite::robust_fqi_infinite;
