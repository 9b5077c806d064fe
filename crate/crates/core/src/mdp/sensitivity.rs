use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the weight uncertainty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    /// Odds-ratio bound between full and marginal propensities.
    #[default]
    OddsRatio,
    /// Direct bound `Λ⁻¹ ≤ w ≤ Λ` on the density ratio.
    DensityRatio,
}

/// Marginal sensitivity model with parameter `Λ ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityModel {
    pub lambda: f64,
    #[serde(default)]
    pub set_kind: SetKind,
}

impl SensitivityModel {
    pub fn new(lambda: f64, set_kind: SetKind) -> Result<Self> {
        let m = Self { lambda, set_kind };
        m.validate()?;
        Ok(m)
    }

    pub fn odds_ratio(lambda: f64) -> Result<Self> {
        Self::new(lambda, SetKind::OddsRatio)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 1.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Λ must be a finite number ≥ 1, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// `τ = Λ / (1 + Λ)`.
    pub fn tau(&self) -> f64 {
        self.lambda / (1.0 + self.lambda)
    }

    pub fn is_nominal(&self) -> bool {
        self.lambda == 1.0
    }
}
