use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::run::Experiment;
use crate::error::{Error, Result};
use crate::estimators::{linear_fit, FitParameters, Weighting};
use crate::rng::derive_key;
use crate::stats::sample_variance;

const STAGE_SWEEP: u64 = 0x0E4E;
const STAGE_RAW: u64 = 0x4A3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadRow {
    pub f: f64,
    pub method: Method,
    /// Successful runs behind the variance estimate.
    pub runs: usize,
    pub variance: f64,
    pub reference_variance: f64,
    /// `variance / reference_variance`; `None` when either is not positive.
    pub c_em: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadFit {
    pub method: Method,
    pub alpha: f64,
    pub beta: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverheadTable {
    pub n_tqg: usize,
    pub repetitions: usize,
    pub rows: Vec<OverheadRow>,
    pub fits: Vec<OverheadFit>,
}

impl OverheadTable {
    pub fn fit(&self, m: Method) -> Option<&OverheadFit> {
        self.fits.iter().find(|f| f.method == m)
    }

    /// CSV with columns `f,method,C_EM,alpha,beta`; unavailable values are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f,method,C_EM,alpha,beta\n");
        for r in &self.rows {
            let c = r.c_em.map(|v| v.to_string()).unwrap_or_default();
            let (a, b) = self
                .fit(r.method)
                .map(|f| (f.alpha.to_string(), f.beta.to_string()))
                .unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{}\n", r.f, r.method.name(), c, a, b));
        }
        out
    }
}

/// Fits `C = α·exp(β·x)` by least squares on `ln C`.
pub fn fit_overhead(x: &[f64], c_em: &[f64]) -> Result<(f64, f64)> {
    if c_em.iter().any(|c| !(*c > 0.0)) {
        return Err(Error::FitFailure("overhead values must be positive".into()));
    }
    let logs: Vec<f64> = c_em.iter().map(|c| c.ln()).collect();
    let fit = linear_fit(x, &logs, &vec![1.0; x.len()], Weighting::Uniform)?;
    if fit.collinear {
        return Err(Error::FitFailure("need at least two distinct noise rates".into()));
    }
    match fit.params {
        FitParameters::Linear { intercept, slope } => Ok((intercept.exp(), slope)),
        _ => unreachable!(),
    }
}

/// Sampling overhead `C_EM = Var[estimate] / Var[raw target at λ_1]`, each
/// variance taken over `k` independently seeded end-to-end runs at the same
/// total shot budget, followed by a log-linear fit in `N_TQG·f` per method.
pub fn sweep_overhead(config: &ExperimentConfig, k: usize) -> Result<OverheadTable> {
    if k < 5 {
        return Err(Error::InvalidConfig(format!("need at least 5 repetitions, got {k}")));
    }
    let exp = Experiment::new(config.clone())?;
    let mut rows = Vec::new();
    for (i, &f) in config.f.iter().enumerate() {
        let point = exp.prepare(f)?;
        let runs = (0..k)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_key(config.seed, &[STAGE_SWEEP, i as u64, rep as u64]);
                let outcome = exp.run_point(&point, seed, false)?;
                let raw = exp.raw_first_lambda(&point, derive_key(seed, &[STAGE_RAW]))?;
                let means: Vec<(Method, f64)> =
                    outcome.report.methods.iter().map(|s| (s.method, s.mean)).collect();
                Ok((means, raw))
            })
            .collect::<Result<Vec<_>>>()?;
        let raw: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let reference_variance = sample_variance(&raw);
        for &m in &config.methods {
            let values: Vec<f64> = runs
                .iter()
                .filter_map(|(means, _)| means.iter().find(|(mm, _)| *mm == m).map(|(_, v)| *v))
                .collect();
            let variance = if values.len() >= 2 { sample_variance(&values) } else { f64::NAN };
            let c_em = (variance > 0.0 && reference_variance > 0.0).then(|| variance / reference_variance);
            rows.push(OverheadRow {
                f,
                method: m,
                runs: values.len(),
                variance,
                reference_variance,
                c_em,
            });
        }
    }

    let mut fits = Vec::new();
    for &m in &config.methods {
        let (x, c): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.method == m)
            .filter_map(|r| r.c_em.map(|c| (exp.n_tqg as f64 * r.f, c)))
            .unzip();
        if let Ok((alpha, beta)) = fit_overhead(&x, &c) {
            fits.push(OverheadFit {
                method: m,
                alpha,
                beta,
                points: x.len(),
            });
        }
    }
    Ok(OverheadTable {
        n_tqg: exp.n_tqg,
        repetitions: k,
        rows,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_exponential_recovered() {
        let nf: Vec<f64> = [0.001, 0.003, 0.01, 0.03, 0.05, 0.1].iter().map(|f| 32.0 * f).collect();
        let c: Vec<f64> = nf.iter().map(|x: &f64| (4.0 * x).exp()).collect();
        let (a, b) = fit_overhead(&nf, &c).unwrap();
        assert!((a - 1.0).abs() < 1e-10 && (b - 4.0).abs() < 1e-10);
        assert!(fit_overhead(&nf[..1], &c[..1]).is_err());
        assert!(fit_overhead(&[0.1, 0.2], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn raw_estimator_has_unit_overhead() {
        // two independent batches of the raw λ_1 estimator
        let cfg = ExperimentConfig::from_json(r#"{"p": 2, "f": [0.02], "shots_total": 6000, "methods": ["zne"]}"#)
            .unwrap();
        let exp = Experiment::new(cfg).unwrap();
        let point = exp.prepare(0.02).unwrap();
        let batch = |tag: u64| -> Vec<f64> {
            (0..300).map(|k| exp.raw_first_lambda(&point, derive_key(tag, &[k])).unwrap()).collect()
        };
        let ratio = sample_variance(&batch(1)) / sample_variance(&batch(2));
        // F(299, 299) is within [0.7, 1.43] with probability > 0.998
        assert!((0.7..1.43).contains(&ratio), "{ratio}");
    }

    #[test]
    fn needs_five_repetitions() {
        assert!(sweep_overhead(&ExperimentConfig::default(), 4).is_err());
    }
}
