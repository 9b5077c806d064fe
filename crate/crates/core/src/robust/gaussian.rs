use crate::error::{Error, Result};
use crate::numerics::{std_normal_inv_cdf, std_normal_pdf};

/// `C(Λ) = ((Λ² − 1)/Λ)·φ(Φ⁻¹(1/(1 + Λ)))`.
pub fn c_lambda(lambda: f64) -> Result<f64> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "Λ must be a finite number ≥ 1, got {lambda}"
        )));
    }
    if lambda == 1.0 {
        return Ok(0.0);
    }
    let z = std_normal_inv_cdf(1.0 / (1.0 + lambda))?;
    Ok((lambda * lambda - 1.0) / lambda * std_normal_pdf(z))
}

/// Robust lower Bellman backup when `Y | s, a ~ N(μ, σ²)`: `μ − (1 − π^b)·C(Λ)·σ`.
pub fn gaussian_robust_target(mu: f64, sigma: f64, pb: f64, lambda: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidInput(format!("σ must be nonnegative, got {sigma}")));
    }
    if !(pb > 0.0 && pb <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "behavior probability must lie in (0, 1], got {pb}"
        )));
    }
    Ok(mu - (1.0 - pb) * c_lambda(lambda)? * sigma)
}
