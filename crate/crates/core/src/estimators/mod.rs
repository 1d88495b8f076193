//! Extrapolation fits: the dispersion-weighted regression used by the second
//! NRE layer, single-exponential and Richardson ZNE, and the Urbanek-style
//! comparator.

mod linear;
mod lm;
mod urbanek;
mod zne;

use serde::{Deserialize, Serialize};

pub use linear::{linear_fit, weighted_linear_extrapolation};
pub use urbanek::{urbanek_estimate, urbanek_from_values, UrbanekFit};
pub use zne::{
    exponential_fit, exponential_fit_zne, exponential_offset_fit, richardson_from_values,
    richardson_zne,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum FitParameters {
    /// `y = intercept + slope · x`.
    Linear { intercept: f64, slope: f64 },
    /// `y = amplitude · exp(−decay · λ) + offset`.
    Exponential {
        amplitude: f64,
        decay: f64,
        offset: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    Uniform,
    /// `1 / max(D, floor)`.
    InverseDispersion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// The model evaluated at zero (noise level or dispersion).
    pub value: f64,
    pub params: FitParameters,
    /// Root of the (weighted) sum of squared residuals.
    pub residual_norm: f64,
    pub weighting: Weighting,
    /// All abscissae coincide; `value` is then the weighted mean.
    pub collinear: bool,
}
