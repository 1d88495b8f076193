use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing noise scale factors `λ_1 < … < λ_M`, `M ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least two scale factors, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidGrid("scale factors must be finite and positive".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("scale factors must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    /// `[λ_1, λ_1 + h, …, λ_1 + (M−1)h]`.
    pub fn uniform(lambda1: f64, h: f64, m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| lambda1 + i as f64 * h).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Common spacing `h` when every step agrees to 1e-12.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let t = self.spacings();
        let h = t[0];
        t.iter().all(|s| (s - h).abs() <= 1e-12).then_some(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesRole {
    Target,
    Ncc,
}

/// Expectation values of one circuit across a λ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSeries {
    pub grid: LambdaGrid,
    pub values: Vec<f64>,
    pub role: SeriesRole,
}

impl LambdaSeries {
    pub fn new(grid: LambdaGrid, values: Vec<f64>, role: SeriesRole) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::LengthMismatch(format!(
                "{} values for {} scale factors",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, role })
    }
}
