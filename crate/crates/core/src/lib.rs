//! Confounding-robust fitted-Q evaluation and iteration under the marginal
//! sensitivity model.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod experiment;
pub mod fqi;
pub mod lsvi;
pub mod mdp;
pub mod numerics;
pub mod robust;
pub mod seeding;
pub mod sim;

pub use error::{Error, Result};
