//! Noise-robust estimation: the auxiliary quantity and the baseline estimator.
//!
//! For target and noise-canceling (ncc) expectations measured at scale factors
//! `λ_1 < … < λ_M`, the auxiliary quantity is
//!
//! ```text
//! A(n, λ_i) = P1(λ_i) + n · P2(λ_i)
//! P1(λ_i)   = ⟨O⟩_t(λ_i) · ⟨O⟩_ncc / ⟨O⟩_ncc(λ_i)
//! P2(λ_i)   = log(⟨O⟩_ncc / ⟨O⟩_ncc(λ_i))
//! ```
//!
//! The control parameter `n` is chosen so that the Taylor correction
//! `Σ_j (−λ_1)^j / j! · A^[j]` built from finite differences vanishes, leaving
//! `A(n_op, λ_1)` as the baseline estimate. The normalized dispersion
//! `MAD{A(n_op, λ_i)} / MAD{⟨O⟩_t(λ_i)}` measures how much noise sensitivity is
//! left after that step.

mod aux;
mod fd;
mod grid;

pub use aux::{
    baseline_estimate, compute_aux_series, optimal_control, residual_bias_diagnostic,
    taylor_sum_estimate, AuxSeries, BaselineResult, ControlParameter, ResidualBias,
};
pub use fd::{
    fd_coefficients_for_grid, fd_coefficients_from_points, fd_coefficients_nonuniform, fd_coefficients_uniform,
    taylor_weights, FdCoefficients, Spacing,
};
pub use grid::{LambdaGrid, LambdaSeries, SeriesRole};

/// Mean absolute deviation about the mean.
pub fn mad(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "MAD of an empty set");
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|x| (x - m).abs()).sum::<f64>() / values.len() as f64
}
