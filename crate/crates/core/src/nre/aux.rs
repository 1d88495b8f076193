use serde::{Deserialize, Serialize};

use super::fd::FdCoefficients;
use super::grid::LambdaSeries;
use super::mad;
use crate::error::{Error, Result};

/// `P1` and `P2` evaluated on every grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxSeries {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub ncc_noiseless: f64,
}

impl AuxSeries {
    /// Builds the series from raw target and ncc values on a shared grid.
    pub fn from_values(target: &[f64], ncc: &[f64], ncc_noiseless: f64) -> Result<Self> {
        if target.len() != ncc.len() {
            return Err(Error::LengthMismatch(format!(
                "target has {} points, ncc has {}",
                target.len(),
                ncc.len()
            )));
        }
        if ncc_noiseless == 0.0 || !ncc_noiseless.is_finite() {
            return Err(Error::ZeroNoiseless);
        }
        let mut p1 = Vec::with_capacity(target.len());
        let mut p2 = Vec::with_capacity(target.len());
        for (index, (&t, &c)) in target.iter().zip(ncc).enumerate() {
            let ratio = ncc_noiseless / c;
            if !(ratio > 0.0) || !ratio.is_finite() {
                return Err(Error::SignViolation {
                    index,
                    value: c,
                    noiseless: ncc_noiseless,
                });
            }
            p1.push(t * ratio);
            p2.push(ratio.ln());
        }
        Ok(Self {
            p1,
            p2,
            ncc_noiseless,
        })
    }

    pub fn len(&self) -> usize {
        self.p1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p1.is_empty()
    }

    /// `A(n, λ_i)` for every grid point.
    pub fn aux(&self, n: f64) -> Vec<f64> {
        self.p1.iter().zip(&self.p2).map(|(a, b)| a + n * b).collect()
    }
}

pub fn compute_aux_series(
    target: &LambdaSeries,
    ncc: &LambdaSeries,
    ncc_noiseless: f64,
) -> Result<AuxSeries> {
    if target.grid != ncc.grid {
        return Err(Error::InvalidGrid(
            "target and ncc series use different grids".into(),
        ));
    }
    AuxSeries::from_values(&target.values, &ncc.values, ncc_noiseless)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParameter {
    pub n_op: f64,
    /// Set when `|Σ V_i P2_i|` is too small to divide by; `n_op` is then 0.
    pub degenerate: bool,
}

/// `n_op = −Σ V_i P1_i / Σ V_i P2_i`.
pub fn optimal_control(aux: &AuxSeries, v: &[f64]) -> Result<ControlParameter> {
    if v.len() != aux.len() {
        return Err(Error::LengthMismatch(format!(
            "{} Taylor weights for {} grid points",
            v.len(),
            aux.len()
        )));
    }
    let num: f64 = v.iter().zip(&aux.p1).map(|(a, b)| a * b).sum();
    let den: f64 = v.iter().zip(&aux.p2).map(|(a, b)| a * b).sum();
    if den.abs() < 1e-12 * (num.abs() + 1.0) {
        return Ok(ControlParameter {
            n_op: 0.0,
            degenerate: true,
        });
    }
    Ok(ControlParameter {
        n_op: -num / den,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub estimate: f64,
    pub n_op: f64,
    /// Normalized dispersion `MAD{A(n_op, λ_i)} / MAD{target_i}`.
    pub dispersion: f64,
    pub degenerate: bool,
}

/// `A(n_op, λ_1)` together with the normalized dispersion.
///
/// A target series with no spread is accepted only when the auxiliary series
/// is flat as well, in which case the dispersion is 0.
pub fn baseline_estimate(
    aux: &AuxSeries,
    target: &[f64],
    control: ControlParameter,
) -> Result<BaselineResult> {
    if target.len() != aux.len() {
        return Err(Error::LengthMismatch(format!(
            "{} target values for {} grid points",
            target.len(),
            aux.len()
        )));
    }
    let a = aux.aux(control.n_op);
    let scale = target.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-14 * scale;
    let num = mad(&a);
    let den = mad(target);
    let dispersion = if den < tol {
        if num < tol * (1.0 + control.n_op.abs()) {
            0.0
        } else {
            return Err(Error::DegenerateDispersion);
        }
    } else {
        num / den
    };
    Ok(BaselineResult {
        estimate: a[0],
        n_op: control.n_op,
        dispersion,
        degenerate: control.degenerate,
    })
}

/// `A(n, λ_1) + Σ_i V_i A(n, λ_i)` with `V` taken from `fd` at `λ_1`.
pub fn taylor_sum_estimate(aux: &AuxSeries, n: f64, fd: &FdCoefficients, lambda1: f64) -> f64 {
    let a = aux.aux(n);
    let v = fd.taylor_weights(lambda1);
    a[0] + v.iter().zip(&a).map(|(w, x)| w * x).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualBias {
    /// `truth − estimate`.
    pub bias: f64,
    /// Contribution of the gap between intended and implemented spacings,
    /// `Σ_j (−λ_1)^j/j! Σ_i (a'_ji(t) − a_ji(h)) A(n_op, λ_i)`.
    pub amplification: f64,
}

pub fn residual_bias_diagnostic(
    truth: f64,
    baseline: &BaselineResult,
    aux: &AuxSeries,
    intended: &FdCoefficients,
    implemented: &FdCoefficients,
    lambda1: f64,
) -> Result<ResidualBias> {
    if intended.points() != aux.len() || implemented.points() != aux.len() {
        return Err(Error::LengthMismatch(
            "coefficient matrices do not match the series length".into(),
        ));
    }
    let a = aux.aux(baseline.n_op);
    let v = intended.taylor_weights(lambda1);
    let w = implemented.taylor_weights(lambda1);
    let amplification = v
        .iter()
        .zip(&w)
        .zip(&a)
        .map(|((vi, wi), ai)| (wi - vi) * ai)
        .sum();
    Ok(ResidualBias {
        bias: truth - baseline.estimate,
        amplification,
    })
}
