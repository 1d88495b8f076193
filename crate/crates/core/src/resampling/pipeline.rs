use rayon::prelude::*;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_observables, BootstrapSet, ObservableCounts};
use super::STAGE_RESAMPLE;
use crate::error::{Error, Result};
use crate::estimators::weighted_linear_extrapolation;
use crate::nre::{baseline_estimate, fd_coefficients_for_grid, optimal_control, AuxSeries, LambdaGrid};
use crate::rng::stream;
use crate::stats::{mean, median, sample_std};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Bootstrap replicates per counts table.
    pub bootstraps: usize,
    /// Gaussian resamples per bootstrap replicate.
    pub resamples: usize,
    /// Floor on `D` in the `1/D` regression weights.
    pub weight_floor: f64,
    pub seed: u64,
    /// Stop after the first layer: one baseline per bootstrap replicate.
    pub baseline_only: bool,
    /// Keep every `(D, baseline)` pair for later analysis.
    pub keep_pooled: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            bootstraps: 200,
            resamples: 40_000,
            weight_floor: 1e-6,
            seed: 0,
            baseline_only: false,
            keep_pooled: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.bootstraps < 2 {
            return Err(Error::InvalidConfig("need at least two bootstrap replicates".into()));
        }
        if !self.baseline_only && self.resamples < 2 {
            return Err(Error::InvalidConfig("need at least two resamples per replicate".into()));
        }
        if !(self.weight_floor > 0.0) {
            return Err(Error::InvalidConfig("weight floor must be positive".into()));
        }
        if !self.baseline_only && m < 3 {
            return Err(Error::InvalidGrid(
                "the dispersion regression needs at least three scale factors".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateDistribution {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl EstimateDistribution {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let mean = mean(&samples);
        let std = sample_std(&samples);
        Self { samples, mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledSample {
    pub dispersion: f64,
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    /// One second-layer estimate per bootstrap replicate.
    pub final_estimates: EstimateDistribution,
    /// Median baseline over each replicate's resamples.
    pub baselines: EstimateDistribution,
    pub discarded: usize,
    /// Baseline evaluations attempted, `B·R` (or `B` in baseline-only mode).
    pub evaluations: usize,
    pub pooled: Option<Vec<PooledSample>>,
}

impl PipelineOutput {
    pub fn discard_rate(&self) -> f64 {
        self.discarded as f64 / self.evaluations as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaExpectation {
    pub lambda: f64,
    pub target: f64,
    pub ncc: f64,
}

/// Summary written next to every pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub final_mean: f64,
    pub final_std: f64,
    pub baseline_mean: f64,
    pub baseline_std: f64,
    pub discard_rate: f64,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub lambda_grid: Vec<f64>,
    pub per_lambda_expectations: Vec<LambdaExpectation>,
}

impl PipelineReport {
    pub fn new(out: &PipelineOutput, config: &PipelineConfig, grid: &LambdaGrid, target: &[f64], ncc: &[f64]) -> Self {
        Self {
            final_mean: out.final_estimates.mean,
            final_std: out.final_estimates.std,
            baseline_mean: out.baselines.mean,
            baseline_std: out.baselines.std,
            discard_rate: out.discard_rate(),
            b: config.bootstraps,
            r: if config.baseline_only { 0 } else { config.resamples },
            lambda_grid: grid.values().to_vec(),
            per_lambda_expectations: grid
                .values()
                .iter()
                .zip(target.iter().zip(ncc))
                .map(|(&lambda, (&t, &c))| LambdaExpectation { lambda, target: t, ncc: c })
                .collect(),
        }
    }
}

struct Replicate {
    estimate: f64,
    baseline: f64,
    discarded: usize,
    pooled: Vec<PooledSample>,
}

/// Bootstraps the counts and runs both post-processing layers.
pub fn run_nre_pipeline(
    counts: &ObservableCounts,
    ncc_noiseless: f64,
    config: &PipelineConfig,
) -> Result<PipelineOutput> {
    config.validate(counts.grid.len())?;
    let set = bootstrap_observables(counts, config.bootstraps, config.seed)?;
    run_nre_on_bootstrap(&set, &counts.grid, ncc_noiseless, config)
}

/// Both post-processing layers on an existing bootstrap set.
pub fn run_nre_on_bootstrap(
    set: &BootstrapSet,
    grid: &LambdaGrid,
    ncc_noiseless: f64,
    config: &PipelineConfig,
) -> Result<PipelineOutput> {
    config.validate(grid.len())?;
    if set.len() != grid.len() {
        return Err(Error::LengthMismatch(format!(
            "bootstrap set covers {} scale factors, grid has {}",
            set.len(),
            grid.len()
        )));
    }
    if ncc_noiseless == 0.0 {
        return Err(Error::ZeroNoiseless);
    }
    let v = fd_coefficients_for_grid(grid.values())?.taylor_weights(grid.first());

    if config.baseline_only {
        return baseline_only(set, &v, ncc_noiseless, config);
    }

    let replicates: Vec<Replicate> = (0..set.b)
        .into_par_iter()
        .map(|s| resample_replicate(set, s, &v, ncc_noiseless, config))
        .collect::<Result<_>>()?;

    let discarded = replicates.iter().map(|r| r.discarded).sum();
    let pooled = config
        .keep_pooled
        .then(|| replicates.iter().flat_map(|r| r.pooled.iter().copied()).collect());
    Ok(PipelineOutput {
        final_estimates: EstimateDistribution::from_samples(replicates.iter().map(|r| r.estimate).collect()),
        baselines: EstimateDistribution::from_samples(replicates.iter().map(|r| r.baseline).collect()),
        discarded,
        evaluations: set.b * config.resamples,
        pooled,
    })
}

fn resample_replicate(
    set: &BootstrapSet,
    s: usize,
    v: &[f64],
    ncc_noiseless: f64,
    config: &PipelineConfig,
) -> Result<Replicate> {
    let m = set.len();
    let r = config.resamples;
    let mut rng = stream(config.seed, &[STAGE_RESAMPLE, s as u64]);
    let draw = |center: f64, std: f64| (std > 0.0).then(|| Normal::new(center, std).expect("finite std"));
    let target_dists: Vec<_> = (0..m).map(|i| draw(set.target[i][s], set.target_std[i])).collect();
    let ncc_dists: Vec<_> = (0..m).map(|i| draw(set.ncc[i][s], set.ncc_std[i])).collect();

    let mut dispersions = Vec::with_capacity(r);
    let mut baselines = Vec::with_capacity(r);
    let mut target = vec![0.0; m];
    let mut ncc = vec![0.0; m];
    let mut discarded = 0;
    for _ in 0..r {
        for i in 0..m {
            target[i] = target_dists[i].as_ref().map_or(set.target[i][s], |d| d.sample(&mut rng));
            ncc[i] = ncc_dists[i].as_ref().map_or(set.ncc[i][s], |d| d.sample(&mut rng));
        }
        let aux = match AuxSeries::from_values(&target, &ncc, ncc_noiseless) {
            Ok(aux) => aux,
            Err(Error::SignViolation { .. }) => {
                discarded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let control = optimal_control(&aux, v)?;
        let b = baseline_estimate(&aux, &target, control)?;
        dispersions.push(b.dispersion);
        baselines.push(b.estimate);
    }
    if 2 * discarded > r {
        return Err(Error::ExcessiveSignViolations {
            bootstrap: s,
            discarded,
            total: r,
        });
    }
    let fit = weighted_linear_extrapolation(&dispersions, &baselines, config.weight_floor)?;
    let pooled = if config.keep_pooled {
        dispersions
            .iter()
            .zip(&baselines)
            .map(|(&dispersion, &baseline)| PooledSample { dispersion, baseline })
            .collect()
    } else {
        Vec::new()
    };
    Ok(Replicate {
        estimate: fit.value,
        baseline: median(&baselines),
        discarded,
        pooled,
    })
}

fn baseline_only(set: &BootstrapSet, v: &[f64], ncc_noiseless: f64, config: &PipelineConfig) -> Result<PipelineOutput> {
    let mut estimates = Vec::with_capacity(set.b);
    let mut pooled = Vec::new();
    let mut discarded = 0;
    for s in 0..set.b {
        let target = set.target_at(s);
        let aux = match AuxSeries::from_values(&target, &set.ncc_at(s), ncc_noiseless) {
            Ok(aux) => aux,
            Err(Error::SignViolation { .. }) => {
                discarded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let b = baseline_estimate(&aux, &target, optimal_control(&aux, v)?)?;
        estimates.push(b.estimate);
        if config.keep_pooled {
            pooled.push(PooledSample {
                dispersion: b.dispersion,
                baseline: b.estimate,
            });
        }
    }
    if 2 * discarded > set.b {
        return Err(Error::ExcessiveSignViolations {
            bootstrap: 0,
            discarded,
            total: set.b,
        });
    }
    let dist = EstimateDistribution::from_samples(estimates);
    Ok(PipelineOutput {
        final_estimates: dist.clone(),
        baselines: dist,
        discarded,
        evaluations: set.b,
        pooled: config.keep_pooled.then_some(pooled),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> PipelineConfig {
        PipelineConfig {
            bootstraps: 8,
            resamples: 500,
            seed,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn noiseless_inputs_reproduce_truth() {
        let grid = LambdaGrid::uniform(1.0, 1.0, 3).unwrap();
        let set = BootstrapSet::exact(&[-3.2; 3], &[0.8; 3], 5).unwrap();
        let out = run_nre_on_bootstrap(&set, &grid, 0.8, &small(1)).unwrap();
        assert!(out.final_estimates.samples.iter().all(|x| (x + 3.2).abs() < 1e-9));
        assert_eq!(out.discarded, 0);
        assert_eq!(out.evaluations, 5 * 500);
    }

    #[test]
    fn deterministic_under_parallel_schedule() {
        let grid = LambdaGrid::uniform(1.0, 1.0, 3).unwrap();
        let set = BootstrapSet::new(
            vec![vec![0.9, 0.91, 0.89], vec![0.8, 0.82, 0.79], vec![0.7, 0.69, 0.72]],
            vec![vec![0.5, 0.49, 0.51], vec![0.45, 0.46, 0.44], vec![0.41, 0.4, 0.42]],
        )
        .unwrap();
        let a = run_nre_on_bootstrap(&set, &grid, 0.55, &small(9)).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_nre_on_bootstrap(&set, &grid, 0.55, &small(9)).unwrap());
        assert_eq!(a, b);
        let c = run_nre_on_bootstrap(&set, &grid, 0.55, &small(10)).unwrap();
        assert_ne!(a.final_estimates.samples, c.final_estimates.samples);
    }

    #[test]
    fn two_points_need_baseline_only() {
        let grid = LambdaGrid::uniform(1.0, 1.0, 2).unwrap();
        let set = BootstrapSet::exact(&[0.9, 0.8], &[0.5, 0.45], 4).unwrap();
        assert!(run_nre_on_bootstrap(&set, &grid, 0.55, &small(1)).is_err());
        let cfg = PipelineConfig {
            baseline_only: true,
            ..small(1)
        };
        let out = run_nre_on_bootstrap(&set, &grid, 0.55, &cfg).unwrap();
        assert_eq!(out.final_estimates.samples.len(), 4);
    }

    #[test]
    fn sign_violations_abort_above_half() {
        let grid = LambdaGrid::uniform(1.0, 1.0, 3).unwrap();
        // the λ_3 ncc value sits on zero with a wide spread
        let set = BootstrapSet::new(
            vec![vec![0.9, 0.9], vec![0.8, 0.8], vec![0.7, 0.7]],
            vec![vec![0.5, 0.5], vec![0.4, 0.4], vec![-0.3, 0.3]],
        )
        .unwrap();
        let err = run_nre_on_bootstrap(&set, &grid, 0.55, &small(2)).unwrap_err();
        assert!(matches!(err, Error::ExcessiveSignViolations { .. }));
    }

    #[test]
    fn report_fields() {
        let grid = LambdaGrid::uniform(1.0, 1.0, 3).unwrap();
        let set = BootstrapSet::exact(&[1.0; 3], &[0.5; 3], 3).unwrap();
        let cfg = small(3);
        let out = run_nre_on_bootstrap(&set, &grid, 0.5, &cfg).unwrap();
        let rep = PipelineReport::new(&out, &cfg, &grid, &[1.0; 3], &[0.5; 3]);
        let json = serde_json::to_value(&rep).unwrap();
        for key in [
            "final_mean", "final_std", "baseline_mean", "baseline_std", "discard_rate", "B", "R",
            "lambda_grid", "per_lambda_expectations",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
