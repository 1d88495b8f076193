use serde::{Deserialize, Serialize};

use super::linear::linear_fit;
use super::zne::exponential_fit;
use super::{FitResult, Weighting};
use crate::error::Result;
use crate::nre::{compute_aux_series, AuxSeries, LambdaSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UrbanekFit {
    #[default]
    Linear,
    Exponential,
}

/// Rescales the target by the noise-canceling decay `ncc_noiseless / ncc_i`
/// and extrapolates the result to `λ = 0`.
pub fn urbanek_estimate(
    target: &LambdaSeries,
    ncc: &LambdaSeries,
    ncc_noiseless: f64,
    fit: UrbanekFit,
) -> Result<FitResult> {
    let aux = compute_aux_series(target, ncc, ncc_noiseless)?;
    extrapolate(target.grid.values(), &aux, fit)
}

pub fn urbanek_from_values(
    lambdas: &[f64],
    target: &[f64],
    ncc: &[f64],
    ncc_noiseless: f64,
    fit: UrbanekFit,
) -> Result<FitResult> {
    let aux = AuxSeries::from_values(target, ncc, ncc_noiseless)?;
    extrapolate(lambdas, &aux, fit)
}

fn extrapolate(lambdas: &[f64], aux: &AuxSeries, fit: UrbanekFit) -> Result<FitResult> {
    match fit {
        UrbanekFit::Linear => linear_fit(lambdas, &aux.p1, &vec![1.0; aux.len()], Weighting::Uniform),
        UrbanekFit::Exponential => exponential_fit(lambdas, &aux.p1),
    }
}
