use super::{FitParameters, FitResult, Weighting};
use crate::error::{Error, Result};

/// Weighted least-squares line through `(x_i, y_i)`.
pub fn linear_fit(x: &[f64], y: &[f64], w: &[f64], weighting: Weighting) -> Result<FitResult> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(Error::LengthMismatch(format!(
            "{} abscissae, {} ordinates, {} weights",
            x.len(),
            y.len(),
            w.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::FitFailure("need at least two points".into()));
    }
    if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::FitFailure("weights must be positive and finite".into()));
    }
    let sw: f64 = w.iter().sum();
    let xm = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = w.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut x2 = 0.0;
    for ((wi, xi), yi) in w.iter().zip(x).zip(y) {
        let dx = xi - xm;
        sxx += wi * dx * dx;
        sxy += wi * dx * (yi - ym);
        x2 += wi * xi * xi;
    }
    let collinear = sxx <= 1e-24 * x2 || sxx == 0.0;
    let (intercept, slope) = if collinear {
        (ym, 0.0)
    } else {
        let slope = sxy / sxx;
        (ym - slope * xm, slope)
    };
    let rss: f64 = w
        .iter()
        .zip(x)
        .zip(y)
        .map(|((wi, xi), yi)| wi * (yi - intercept - slope * xi).powi(2))
        .sum();
    Ok(FitResult {
        value: intercept,
        params: FitParameters::Linear { intercept, slope },
        residual_norm: rss.sqrt(),
        weighting,
        collinear,
    })
}

/// Regresses `y` on the normalized dispersion `D` with weights
/// `1 / max(D, floor)` and returns the intercept at `D = 0`.
pub fn weighted_linear_extrapolation(d: &[f64], y: &[f64], floor: f64) -> Result<FitResult> {
    if !(floor > 0.0) {
        return Err(Error::InvalidConfig(format!("weight floor must be positive, got {floor}")));
    }
    if let Some(bad) = d.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::FitFailure(format!("negative or undefined dispersion {bad}")));
    }
    let w: Vec<f64> = d.iter().map(|v| 1.0 / v.max(floor)).collect();
    linear_fit(d, y, &w, Weighting::InverseDispersion)
}
