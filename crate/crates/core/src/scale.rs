//! Per-feature min-max scaling to `[-1, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureScale {
    Identity,
    /// Maps `[min, max]` onto `[-1, 1]`.
    MinMax { min: f64, max: f64 },
}

impl FeatureScale {
    pub fn min_max(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::InvalidParameter(format!(
                "min-max scale needs finite min < max, got [{min}, {max}]"
            )));
        }
        Ok(FeatureScale::MinMax { min, max })
    }

    pub fn transform(&self, x: f64) -> f64 {
        match *self {
            FeatureScale::Identity => x,
            FeatureScale::MinMax { min, max } => 2.0 * (x - min) / (max - min) - 1.0,
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            FeatureScale::Identity => y,
            FeatureScale::MinMax { min, max } => (y + 1.0) / 2.0 * (max - min) + min,
        }
    }
}

/// One scale per model feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Scaler {
    pub scales: Vec<FeatureScale>,
}

impl Scaler {
    pub fn identity(n_features: usize) -> Self {
        Scaler {
            scales: vec![FeatureScale::Identity; n_features],
        }
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check(row.len())?;
        Ok(row.iter().zip(&self.scales).map(|(&x, s)| s.transform(x)).collect())
    }

    pub fn inverse(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check(row.len())?;
        Ok(row.iter().zip(&self.scales).map(|(&y, s)| s.inverse(y)).collect())
    }

    fn check(&self, got: usize) -> Result<()> {
        if got != self.scales.len() {
            return Err(Error::DimensionMismatch {
                expected: self.scales.len(),
                got,
            });
        }
        Ok(())
    }
}
