//! Damped Gauss–Newton (Levenberg–Marquardt) for small dense least-squares
//! problems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) struct Solution {
    pub params: DVector<f64>,
}

/// Minimizes `½‖r(θ)‖²`; `model` returns the residual vector and its Jacobian.
pub(crate) fn levenberg_marquardt<F>(start: DVector<f64>, model: F) -> Result<Solution>
where
    F: Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
{
    let mut theta = start;
    let (mut r, mut j) = model(&theta);
    let mut cost = 0.5 * r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::FitFailure("non-finite residual at the starting point".into()));
    }
    let mut mu = 1e-3;
    for _ in 0..500 {
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        if g.amax() <= 1e-15 * (1.0 + cost) {
            return Ok(Solution { params: theta });
        }
        let mut damped = jtj.clone();
        for k in 0..damped.nrows() {
            damped[(k, k)] += mu * jtj[(k, k)].max(1e-12);
        }
        let Some(step) = damped.lu().solve(&(-&g)) else {
            mu *= 10.0;
            continue;
        };
        let trial = &theta + &step;
        let (rt, jt_new) = model(&trial);
        let trial_cost = 0.5 * rt.norm_squared();
        if trial_cost.is_finite() && trial_cost <= cost {
            let converged = step.norm() <= 1e-12 * (1.0 + theta.norm())
                || cost - trial_cost <= 1e-16 * cost.max(f64::MIN_POSITIVE);
            theta = trial;
            r = rt;
            j = jt_new;
            cost = trial_cost;
            mu = (mu * 0.3).max(1e-12);
            if converged {
                return Ok(Solution { params: theta });
            }
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                // no descent direction left: stationary to working precision
                return Ok(Solution { params: theta });
            }
        }
    }
    Err(Error::FitFailure("nonlinear least squares did not converge".into()))
}
