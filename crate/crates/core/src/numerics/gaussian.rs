use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 − Φ(x)` without cancellation.
fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Quantile function of the standard normal.
///
/// A rational initial guess is refined by Halley steps on the lower tail,
/// with the upper half handled by symmetry.
pub fn std_normal_inv_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("inverse normal CDF needs p in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (q, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let t = (-2.0 * q.ln()).sqrt();
    let (c0, c1, c2) = (2.515517, 0.802853, 0.010328);
    let (d1, d2, d3) = (1.432788, 0.189269, 0.001308);
    // z is the upper-tail point with 1 − Φ(z) = q
    let mut z = t - (c0 + c1 * t + c2 * t * t) / (1.0 + d1 * t + d2 * t * t + d3 * t * t * t);
    for _ in 0..4 {
        let e = upper_tail(z) - q;
        let u = e / std_normal_pdf(z);
        // Halley step for g(z) = 1 − Φ(z) − q, g' = −φ, g'' = zφ
        z += u / (1.0 - 0.5 * z * u);
        if u.abs() < 1e-16 {
            break;
        }
    }
    Ok(sign * z)
}
