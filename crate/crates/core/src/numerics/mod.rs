//! Dense linear algebra, regression solvers, and Gaussian special functions.

pub mod gaussian;
pub mod lasso;
pub mod least_squares;
pub mod linear;
pub mod logistic;
pub mod matrix;
pub mod quantile;

pub use gaussian::{std_normal_cdf, std_normal_inv_cdf, std_normal_pdf};
pub use lasso::fit_lasso;
pub use least_squares::fit_least_squares;
pub use linear::{Fit, FitConfig, LinearModel};
pub use logistic::{fit_multinomial_logistic, LogisticClassifier};
pub use matrix::{
    axpy, cholesky, cholesky_solve, dot, mean, min_norm_solve, norm2, spd_inverse, spectral_norm, spectral_radius,
    DenseMatrix,
};
pub use quantile::{fit_quantile_l1, pinball, pinball_objective};
