//! Forward finite-difference coefficients at the first grid point.
//!
//! Row `j` (derivative order `j = 1..M−1`) of an `FdCoefficients` matrix gives
//! `f^[j](x_1) ≈ Σ_i a_ji f(x_i)`. All rows sum to zero, so a constant series
//! has vanishing numerical derivatives.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Spacing {
    Uniform(f64),
    NonUniform(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdCoefficients {
    /// `rows[j-1][i]` is the weight of point `i` in the order-`j` derivative.
    pub rows: Vec<Vec<f64>>,
    pub spacing: Spacing,
}

impl FdCoefficients {
    /// Number of grid points `M`.
    pub fn points(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn order(&self, j: usize) -> &[f64] {
        &self.rows[j - 1]
    }

    /// `V_i = Σ_j (−λ_1)^j / j! · a_ji`: the weights that turn point values into
    /// the Taylor correction term at `λ_1`.
    pub fn taylor_weights(&self, lambda1: f64) -> Vec<f64> {
        let m = self.points();
        let mut v = vec![0.0; m];
        let mut factor = 1.0;
        for (j, row) in self.rows.iter().enumerate() {
            factor *= -lambda1 / (j + 1) as f64;
            for (vi, a) in v.iter_mut().zip(row) {
                *vi += factor * a;
            }
        }
        v
    }
}

/// Generic coefficients from the moment conditions
/// `Σ_i c_i (x_i − x_1)^k = k! δ_kj`, `k = 0..M−1`.
pub fn fd_coefficients_from_points(points: &[f64]) -> Result<FdCoefficients> {
    let m = points.len();
    if m < 2 {
        return Err(Error::InvalidGrid("need at least two points".into()));
    }
    let offsets: Vec<f64> = points.iter().map(|x| x - points[0]).collect();
    if offsets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("points must be strictly increasing".into()));
    }
    // work in units of the full span for conditioning
    let span = offsets[m - 1];
    let vander = DMatrix::from_fn(m, m, |k, i| (offsets[i] / span).powi(k as i32));
    let lu = vander.lu();

    let mut rows = Vec::with_capacity(m - 1);
    let mut fact = 1.0;
    for j in 1..m {
        fact *= j as f64;
        let mut rhs = DVector::zeros(m);
        rhs[j] = fact;
        let sol = lu
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidGrid("singular moment system".into()))?;
        let scale = span.powi(j as i32);
        rows.push(sol.iter().map(|c| c / scale).collect());
    }
    let spacing = Spacing::NonUniform(offsets.windows(2).map(|w| w[1] - w[0]).collect());
    Ok(FdCoefficients { rows, spacing })
}

/// Coefficients for `M` points spaced by `h`.
pub fn fd_coefficients_uniform(m: usize, h: f64) -> Result<FdCoefficients> {
    if m < 2 {
        return Err(Error::InvalidGrid(format!("need M >= 2, got {m}")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
    }
    let points: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
    let mut c = fd_coefficients_from_points(&points)?;
    c.spacing = Spacing::Uniform(h);
    Ok(c)
}

/// Coefficients for implemented spacings `t = (t_1, …, t_{M−1})`. `M = 2` and
/// `M = 3` use closed forms; larger grids go through the moment conditions.
pub fn fd_coefficients_nonuniform(t: &[f64]) -> Result<FdCoefficients> {
    if t.is_empty() {
        return Err(Error::InvalidGrid("need at least one spacing".into()));
    }
    if t.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidGrid("spacings must be positive".into()));
    }
    let spacing = Spacing::NonUniform(t.to_vec());
    match *t {
        [t1] => Ok(FdCoefficients {
            rows: vec![vec![-1.0 / t1, 1.0 / t1]],
            spacing,
        }),
        [t1, t2] => {
            let r = t2 / t1;
            let c1 = 1.0 / ((1.0 + r).powi(2) * t1 - (t1 + t2));
            let c2 = 2.0 / (t2 * (t1 + t2));
            Ok(FdCoefficients {
                rows: vec![
                    vec![-c1 * (r * r + 2.0 * r), c1 * (1.0 + r).powi(2), -c1],
                    vec![c2 * r, -c2 * (1.0 + r), c2],
                ],
                spacing,
            })
        }
        _ => {
            let mut points = vec![0.0];
            for s in t {
                points.push(points.last().unwrap() + s);
            }
            let mut c = fd_coefficients_from_points(&points)?;
            c.spacing = spacing;
            Ok(c)
        }
    }
}

/// Coefficients for an arbitrary ascending grid, using the uniform form when
/// every spacing agrees to 1e-12.
pub fn fd_coefficients_for_grid(lambdas: &[f64]) -> Result<FdCoefficients> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidGrid("need at least two points".into()));
    }
    let t: Vec<f64> = lambdas.windows(2).map(|w| w[1] - w[0]).collect();
    if t.iter().all(|s| (s - t[0]).abs() <= 1e-12) {
        fd_coefficients_uniform(lambdas.len(), t[0])
    } else {
        fd_coefficients_nonuniform(&t)
    }
}

/// Taylor weights for a uniform grid `λ_1, λ_1 + h, …`.
pub fn taylor_weights(m: usize, h: f64, lambda1: f64) -> Result<Vec<f64>> {
    Ok(fd_coefficients_uniform(m, h)?.taylor_weights(lambda1))
}
