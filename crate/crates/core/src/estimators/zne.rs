use nalgebra::{DMatrix, DVector};

use super::lm::levenberg_marquardt;
use super::linear::linear_fit;
use super::{FitParameters, FitResult, Weighting};
use crate::error::{Error, Result};
use crate::nre::{fd_coefficients_for_grid, LambdaSeries};

fn check_lengths(lambdas: &[f64], ys: &[f64], min: usize) -> Result<()> {
    if lambdas.len() != ys.len() {
        return Err(Error::LengthMismatch(format!(
            "{} scale factors, {} values",
            lambdas.len(),
            ys.len()
        )));
    }
    if ys.len() < min {
        return Err(Error::FitFailure(format!("need at least {min} points, got {}", ys.len())));
    }
    if ys.iter().chain(lambdas).any(|v| !v.is_finite()) {
        return Err(Error::FitFailure("non-finite input".into()));
    }
    Ok(())
}

fn exp_residual_norm(lambdas: &[f64], ys: &[f64], a: f64, b: f64, c: f64) -> f64 {
    lambdas
        .iter()
        .zip(ys)
        .map(|(l, y)| (y - a * (-b * l).exp() - c).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn exp_result(lambdas: &[f64], ys: &[f64], a: f64, b: f64, c: f64) -> FitResult {
    FitResult {
        value: a + c,
        params: FitParameters::Exponential {
            amplitude: a,
            decay: b,
            offset: c,
        },
        residual_norm: exp_residual_norm(lambdas, ys, a, b, c),
        weighting: Weighting::Uniform,
        collinear: false,
    }
}

/// Least-squares line through `(λ_i, ln|y_i|)` over the nonzero entries.
fn log_linear_guess(lambdas: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let (x, ly): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y != 0.0)
        .map(|(l, y)| (*l, y.abs().ln()))
        .unzip();
    if x.len() < 2 {
        return None;
    }
    let fit = linear_fit(&x, &ly, &vec![1.0; x.len()], Weighting::Uniform).ok()?;
    match fit.params {
        FitParameters::Linear { intercept, slope } => Some((intercept.exp(), -slope)),
        _ => None,
    }
}

/// Fits `y = a·exp(−bλ)` and returns `a` as the zero-noise value.
///
/// Same-sign data are fitted exactly in log space; otherwise nonlinear least
/// squares starts from the log-linear fit of `|y|`.
pub fn exponential_fit(lambdas: &[f64], ys: &[f64]) -> Result<FitResult> {
    check_lengths(lambdas, ys, 2)?;
    let sign = if ys[0] < 0.0 { -1.0 } else { 1.0 };
    let same_sign = ys.iter().all(|y| *y * sign > 0.0);
    if same_sign {
        let (amp, decay) = log_linear_guess(lambdas, ys)
            .ok_or_else(|| Error::FitFailure("log-linear fit failed".into()))?;
        return Ok(exp_result(lambdas, ys, sign * amp, decay, 0.0));
    }

    let dominant = ys.iter().cloned().fold(0.0f64, |m, y| if y.abs() > m.abs() { y } else { m });
    let (amp, decay) = log_linear_guess(lambdas, ys).unwrap_or((dominant.abs(), 0.0));
    let start = DVector::from_vec(vec![dominant.signum() * amp, decay]);
    let m = ys.len();
    let sol = levenberg_marquardt(start, |p| {
        let r = DVector::from_iterator(
            m,
            lambdas.iter().zip(ys).map(|(l, y)| p[0] * (-p[1] * l).exp() - y),
        );
        let j = DMatrix::from_fn(m, 2, |i, k| {
            let e = (-p[1] * lambdas[i]).exp();
            if k == 0 {
                e
            } else {
                -p[0] * lambdas[i] * e
            }
        });
        (r, j)
    })?;
    let (a, b) = (sol.params[0], sol.params[1]);
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::FitFailure("exponential fit diverged".into()));
    }
    Ok(exp_result(lambdas, ys, a, b, 0.0))
}

/// Fits `y = a·exp(−bλ) + c` and returns `a + c`. Needs `M ≥ 3`.
pub fn exponential_offset_fit(lambdas: &[f64], ys: &[f64]) -> Result<FitResult> {
    check_lengths(lambdas, ys, 3)?;
    let (a0, b0) = match exponential_fit(lambdas, ys)?.params {
        FitParameters::Exponential { amplitude, decay, .. } => (amplitude, decay),
        _ => unreachable!(),
    };
    let b0 = if b0.abs() < 1e-3 { 0.1 } else { b0 };
    let m = ys.len();
    let sol = levenberg_marquardt(DVector::from_vec(vec![a0, b0, 0.0]), |p| {
        let r = DVector::from_iterator(
            m,
            lambdas
                .iter()
                .zip(ys)
                .map(|(l, y)| p[0] * (-p[1] * l).exp() + p[2] - y),
        );
        let j = DMatrix::from_fn(m, 3, |i, k| {
            let e = (-p[1] * lambdas[i]).exp();
            match k {
                0 => e,
                1 => -p[0] * lambdas[i] * e,
                _ => 1.0,
            }
        });
        (r, j)
    })?;
    let p = sol.params;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailure("offset exponential fit diverged".into()));
    }
    Ok(exp_result(lambdas, ys, p[0], p[1], p[2]))
}

pub fn exponential_fit_zne(series: &LambdaSeries) -> Result<FitResult> {
    exponential_fit(series.grid.values(), &series.values)
}

/// `y_1 + Σ_i V_i y_i`: the Taylor sum at `λ_1` with finite-difference
/// derivatives of the raw series.
pub fn richardson_from_values(lambdas: &[f64], ys: &[f64]) -> Result<f64> {
    check_lengths(lambdas, ys, 2)?;
    let v = fd_coefficients_for_grid(lambdas)?.taylor_weights(lambdas[0]);
    Ok(ys[0] + v.iter().zip(ys).map(|(w, y)| w * y).sum::<f64>())
}

pub fn richardson_zne(series: &LambdaSeries) -> Result<f64> {
    richardson_from_values(series.grid.values(), &series.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{tfim_measurement_groups, to_noise_canceling, build_tfim_qaoa, Topology};
    use crate::nre::{LambdaGrid, SeriesRole};
    use crate::sim::clifford_pauli_oracle;
    use proptest::prelude::*;

    fn amp_decay(r: &FitResult) -> (f64, f64, f64) {
        match r.params {
            FitParameters::Exponential { amplitude, decay, offset } => (amplitude, decay, offset),
            _ => unreachable!(),
        }
    }

    #[test]
    fn exact_exponential_recovered() {
        let l = [1.0, 2.0, 3.0];
        let y: Vec<f64> = l.iter().map(|x: &f64| 0.8 * (-0.5 * x).exp()).collect();
        let r = exponential_fit(&l, &y).unwrap();
        let (a, b, _) = amp_decay(&r);
        assert!((a - 0.8).abs() < 1e-10 && (b - 0.5).abs() < 1e-10);
        assert_eq!(r.value, a);
        assert!(r.residual_norm < 1e-12);
        // negative amplitude
        let yn: Vec<f64> = y.iter().map(|v| -v).collect();
        let (a, b, _) = amp_decay(&exponential_fit(&l, &yn).unwrap());
        assert!((a + 0.8).abs() < 1e-10 && (b - 0.5).abs() < 1e-10);
    }

    #[test]
    fn constant_series() {
        let r = exponential_fit(&[1.0, 2.0, 3.0], &[0.3; 3]).unwrap();
        let (a, b, _) = amp_decay(&r);
        assert!((a - 0.3).abs() < 1e-14 && b.abs() < 1e-14);
        let series = LambdaSeries::new(
            LambdaGrid::uniform(1.0, 1.0, 3).unwrap(),
            vec![0.3; 3],
            SeriesRole::Target,
        )
        .unwrap();
        assert!((richardson_zne(&series).unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn sign_change_uses_nonlinear_path() {
        // a·e^{−bλ} cannot change sign; the fit must still return a finite best fit
        let l = [1.0, 2.0, 3.0, 4.0];
        let y = [0.5, 0.2, 0.05, -0.01];
        let r = exponential_fit(&l, &y).unwrap();
        assert!(r.value.is_finite() && r.value > 0.5);
        let log_guess = log_linear_guess(&l, &y).unwrap();
        let guess_norm = exp_residual_norm(&l, &y, log_guess.0, log_guess.1, 0.0);
        assert!(r.residual_norm <= guess_norm + 1e-15);
    }

    #[test]
    fn offset_variant() {
        let l = [1.0, 1.5, 2.0, 2.5, 3.0];
        let y: Vec<f64> = l.iter().map(|x: &f64| 0.6 * (-0.7 * x).exp() + 0.1).collect();
        let r = exponential_offset_fit(&l, &y).unwrap();
        let (a, b, c) = amp_decay(&r);
        assert!((a - 0.6).abs() < 1e-6 && (b - 0.7).abs() < 1e-6 && (c - 0.1).abs() < 1e-6);
        assert!((r.value - 0.7).abs() < 1e-6);
        assert!(exponential_offset_fit(&l[..2], &y[..2]).is_err());
    }

    #[test]
    fn richardson_fixture() {
        // y_1 + V·y with V = [2, −3, 1]
        let v = richardson_from_values(&[1.0, 2.0, 3.0], &[0.5, 0.4, 0.32]).unwrap();
        assert!((v - 0.62).abs() < 1e-12);
    }

    #[test]
    fn clifford_ncc_decay_is_near_exponential() {
        let topo = Topology::star(5).unwrap();
        let circ = build_tfim_qaoa(&topo, 2.0, 2, &[0.3, 0.5], &[0.4, 0.2]).unwrap();
        let ncc = to_noise_canceling(&circ);
        let groups = tfim_measurement_groups(&topo, 2.0);
        let l = [1.0, 2.0, 3.0];
        for group in &groups {
            let y: Vec<f64> = l
                .iter()
                .map(|x| clifford_pauli_oracle(&ncc, group, 0.01, *x).unwrap())
                .collect();
            if y.iter().all(|v| v.abs() < 1e-12) {
                continue;
            }
            let r = exponential_fit(&l, &y).unwrap();
            assert!(r.residual_norm < 1e-4, "{y:?} residual {}", r.residual_norm);
        }
    }

    /// Lagrange interpolation through all points, evaluated at zero.
    fn lagrange_at_zero(x: &[f64], y: &[f64]) -> f64 {
        (0..x.len())
            .map(|i| {
                let basis: f64 = (0..x.len())
                    .filter(|&j| j != i)
                    .map(|j| x[j] / (x[j] - x[i]))
                    .product();
                y[i] * basis
            })
            .sum()
    }

    proptest! {
        #[test]
        fn exponential_scale_equivariance(
            a in 0.05f64..2.0, b in 0.0f64..1.0, c in 0.1f64..10.0, noise in proptest::collection::vec(-0.01f64..0.01, 3),
        ) {
            let l = [1.0, 2.0, 3.0];
            let y: Vec<f64> = l.iter().zip(&noise).map(|(x, e)| a * (-b * x).exp() * (1.0 + e)).collect();
            let ys: Vec<f64> = y.iter().map(|v| c * v).collect();
            let (a1, b1, _) = amp_decay(&exponential_fit(&l, &y).unwrap());
            let (a2, b2, _) = amp_decay(&exponential_fit(&l, &ys).unwrap());
            prop_assert!((a2 - c * a1).abs() < 1e-10 * c * a1.abs());
            prop_assert!((b2 - b1).abs() < 1e-10);
        }

        #[test]
        fn richardson_exact_on_polynomials(
            coeffs in proptest::collection::vec(-2.0f64..2.0, 4),
            m in 2usize..5,
            l1 in 0.5f64..2.0,
            h in 0.3f64..1.5,
        ) {
            let deg = m - 1;
            let x: Vec<f64> = (0..m).map(|i| l1 + i as f64 * h).collect();
            let y: Vec<f64> = x.iter().map(|v| coeffs[..=deg].iter().enumerate().map(|(k, c)| c * v.powi(k as i32)).sum()).collect();
            let r = richardson_from_values(&x, &y).unwrap();
            prop_assert!((r - coeffs[0]).abs() < 1e-8);
            prop_assert!((r - lagrange_at_zero(&x, &y)).abs() < 1e-8);
        }
    }
}
