use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::circuit::{build_tfim_qaoa, fold_global, tfim_measurement_groups, to_noise_canceling, Circuit, MeasurementGroup, Topology};
use crate::error::{Error, Result};
use crate::estimators::{exponential_fit, exponential_offset_fit, richardson_from_values, urbanek_from_values};
use crate::nre::LambdaGrid;
use crate::resampling::{
    bootstrap_series, run_nre_on_bootstrap, BootstrapSet, EstimateDistribution, PipelineConfig, PipelineOutput,
    PipelineReport,
};
use crate::rng::{derive_key, stream};
use crate::sim::counts::multinomial;
use crate::sim::{
    exact_expectation, exact_ground_energy, rotated_probabilities, simulate_density, Amplification, CountsTable,
    NoiseSpec,
};

const STAGE_LEVEL: u64 = 0x1E7E1;
const STAGE_SAMPLE: u64 = 0x5A3B;
const STAGE_PIPELINE: u64 = 0x919E;
const STAGE_ZNE: u64 = 0x2E0;

const ROLE_TARGET: u64 = 0;
const ROLE_NCC: u64 = 1;
const ROLE_TARGET_EXTRA: u64 = 2;

/// `|estimate − truth| / |truth|`.
pub fn relative_bias(estimate: f64, truth: f64) -> Result<f64> {
    if truth == 0.0 {
        return Err(Error::InvalidConfig("relative bias needs a nonzero reference value".into()));
    }
    Ok((estimate - truth).abs() / truth.abs())
}

/// Splits `total` into `parts` near-equal integers summing to `total`; the
/// first `total mod parts` entries get one extra shot.
pub fn split_budget(total: u64, parts: usize) -> Result<Vec<u64>> {
    if parts == 0 || total < parts as u64 {
        return Err(Error::InvalidConfig(format!("{total} shots cannot cover {parts} coordinates")));
    }
    let base = total / parts as u64;
    let extra = (total % parts as u64) as usize;
    Ok((0..parts).map(|i| base + u64::from(i < extra)).collect())
}

/// Shots per `[λ][group]` for each circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotAllocation {
    pub total: u64,
    pub target: Vec<Vec<u64>>,
    pub ncc: Vec<Vec<u64>>,
    /// Additional target shots given to methods that skip the ncc circuit.
    pub target_extra: Vec<Vec<u64>>,
}

impl ShotAllocation {
    pub fn new(total: u64, m: usize, groups: usize, with_ncc: bool) -> Result<Self> {
        let per = m * groups;
        let split = split_budget(total, if with_ncc { 2 * per } else { per })?;
        let rows = |chunk: &[u64]| chunk.chunks(groups).map(<[u64]>::to_vec).collect::<Vec<_>>();
        let target = rows(&split[..per]);
        let (ncc, target_extra) = if with_ncc {
            let ncc = rows(&split[per..]);
            (ncc.clone(), ncc)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Self {
            total,
            target,
            ncc,
            target_extra,
        })
    }

    fn sum(rows: &[Vec<u64>]) -> u64 {
        rows.iter().flatten().sum()
    }

    /// Shots consumed by the methods that read both circuits.
    pub fn ncc_methods_total(&self) -> u64 {
        Self::sum(&self.target) + Self::sum(&self.ncc)
    }

    /// Shots consumed by target-only methods.
    pub fn target_only_total(&self) -> u64 {
        Self::sum(&self.target) + Self::sum(&self.target_extra)
    }
}

/// Circuits, observables and noiseless references of one configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub topology: Topology,
    pub groups: Vec<MeasurementGroup>,
    pub grid: LambdaGrid,
    pub target: Circuit,
    pub ncc: Circuit,
    /// Noiseless target expectation: the reference for relative bias.
    pub target_noiseless: f64,
    pub ncc_noiseless: f64,
    pub ground_energy: Option<f64>,
    /// Two-qubit gates in the unfolded target circuit.
    pub n_tqg: usize,
    /// Circuits run at each grid point, `(target, ncc)`.
    scaled: Vec<(Circuit, Circuit)>,
}

/// Measurement distributions of every circuit at one noise rate.
#[derive(Debug, Clone)]
pub struct NoisePoint {
    pub f: f64,
    /// Scale factors actually realized for the target circuit.
    pub implemented: Vec<f64>,
    pub exact_target: Vec<f64>,
    pub exact_ncc: Vec<f64>,
    /// `probs[role][λ][group]` with roles target, ncc.
    probs: [Vec<Vec<Vec<f64>>>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub lambda: f64,
    pub implemented_lambda: f64,
    pub target_exact: f64,
    pub ncc_exact: f64,
    pub target_measured: f64,
    pub ncc_measured: Option<f64>,
    /// Noisy over noiseless expectation.
    pub target_ratio: f64,
    pub ncc_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean: f64,
    pub std: f64,
    pub relative_bias: f64,
    /// Bootstrap replicates that produced no estimate.
    pub discarded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFailure {
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevelReport {
    pub f: f64,
    pub seed: u64,
    pub shots: ShotAllocation,
    pub per_lambda: Vec<LambdaReport>,
    pub methods: Vec<MethodSummary>,
    /// Methods whose estimate broke down on this data (e.g. the ncc signal
    /// lost its sign under shot noise).
    pub failures: Vec<MethodFailure>,
    pub nre_pipeline: Option<PipelineReport>,
}

/// A noise-level report plus the raw distributions behind it.
#[derive(Debug, Clone)]
pub struct NoiseLevelOutcome {
    pub report: NoiseLevelReport,
    pub distributions: Vec<(Method, EstimateDistribution)>,
    pub nre: Option<PipelineOutput>,
}

impl NoiseLevelOutcome {
    pub fn summary(&self, m: Method) -> Option<&MethodSummary> {
        self.report.methods.iter().find(|s| s.method == m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub n_qubits: usize,
    pub n_tqg: usize,
    pub target_noiseless: f64,
    pub ncc_noiseless: f64,
    pub ground_energy: Option<f64>,
    pub levels: Vec<NoiseLevelReport>,
}

fn energy(rho: &crate::sim::DensityMatrix, groups: &[MeasurementGroup]) -> f64 {
    groups.iter().map(|g| exact_expectation(rho, g)).sum()
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let topology = config.topology()?;
        let grid = config.grid()?;
        let (gammas, betas) = config.qaoa_angles()?;
        let target = build_tfim_qaoa(&topology, config.g, config.p, &gammas, &betas)?;
        let ncc = to_noise_canceling(&target);
        let groups = tfim_measurement_groups(&topology, config.g).to_vec();
        let noiseless = NoiseSpec::noiseless();
        let target_noiseless = energy(&simulate_density(&target, &noiseless, 1.0)?, &groups);
        let ncc_noiseless = energy(&simulate_density(&ncc, &noiseless, 1.0)?, &groups);
        if config.methods.iter().any(|m| m.uses_ncc()) && ncc_noiseless.abs() < 1e-12 {
            return Err(Error::ZeroNoiseless);
        }
        if target_noiseless.abs() < 1e-12 {
            return Err(Error::InvalidConfig("noiseless target expectation is zero".into()));
        }
        let ground_energy = (topology.n() <= 12).then(|| exact_ground_energy(&topology, config.g)).transpose()?;
        let scaled = grid
            .values()
            .iter()
            .map(|&l| match config.amplification {
                Amplification::Folded => Ok((fold_global(&target, l)?, fold_global(&ncc, l)?)),
                _ => Ok((target.clone(), ncc.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        let n_tqg = target.gate_counts().two_qubit;
        Ok(Self {
            config,
            topology,
            groups,
            grid,
            target,
            ncc,
            target_noiseless,
            ncc_noiseless,
            ground_energy,
            n_tqg,
            scaled,
        })
    }

    pub fn uses_ncc(&self) -> bool {
        self.config.methods.iter().any(|m| m.uses_ncc())
    }

    pub fn allocation(&self) -> Result<ShotAllocation> {
        ShotAllocation::new(self.config.shots_total, self.grid.len(), self.groups.len(), self.uses_ncc())
    }

    /// Simulates every scaled circuit at base rate `f`.
    pub fn prepare(&self, f: f64) -> Result<NoisePoint> {
        let noise = NoiseSpec::new(f, self.config.amplification.clone())?;
        let lambdas = noise.implemented_lambdas(self.grid.values())?;
        let mut probs: [Vec<Vec<Vec<f64>>>; 2] = [Vec::new(), Vec::new()];
        let mut exact = [Vec::new(), Vec::new()];
        let mut implemented = Vec::new();
        for ((target, ncc), &lambda) in self.scaled.iter().zip(&lambdas) {
            implemented.push(match self.config.amplification {
                Amplification::Folded => {
                    target.gate_counts().two_qubit as f64 / self.n_tqg.max(1) as f64
                }
                _ => lambda,
            });
            for (role, circuit) in [target, ncc].into_iter().enumerate() {
                let rho = simulate_density(circuit, &noise, lambda)?;
                exact[role].push(energy(&rho, &self.groups));
                probs[role].push(self.groups.iter().map(|g| rotated_probabilities(&rho, g)).collect());
            }
        }
        let [exact_target, exact_ncc] = exact;
        Ok(NoisePoint {
            f,
            implemented,
            exact_target,
            exact_ncc,
            probs,
        })
    }

    fn sample_tables(&self, point: &NoisePoint, role: usize, shots: &[Vec<u64>], seed: u64, tag: u64) -> Result<Vec<Vec<CountsTable>>> {
        point.probs[role]
            .iter()
            .zip(shots)
            .enumerate()
            .map(|(i, (per_group, row))| {
                per_group
                    .iter()
                    .zip(row)
                    .enumerate()
                    .map(|(k, (p, &s))| {
                        let mut rng = stream(seed, &[STAGE_SAMPLE, tag, i as u64, k as u64]);
                        CountsTable::new(self.topology.n(), multinomial(p, s, &mut rng))
                    })
                    .collect()
            })
            .collect()
    }

    fn measured(&self, tables: &[Vec<CountsTable>]) -> Result<Vec<f64>> {
        tables
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.groups)
                    .map(|(t, g)| crate::sim::expectation_from_counts(t, g))
                    .sum()
            })
            .collect()
    }

    /// Raw target estimate at `λ_1` with the whole budget spent there.
    pub fn raw_first_lambda(&self, point: &NoisePoint, seed: u64) -> Result<f64> {
        let shots = split_budget(self.config.shots_total, self.groups.len())?;
        let tables = self.sample_tables(point, 0, &[shots], seed, 0xAA)?;
        Ok(self.measured(&tables)?[0])
    }

    /// Samples counts for every circuit and runs all requested methods on them.
    pub fn run_point(&self, point: &NoisePoint, seed: u64, keep_pooled: bool) -> Result<NoiseLevelOutcome> {
        let cfg = &self.config;
        let shots = self.allocation()?;
        let b = cfg.bootstraps;
        let lambdas = self.grid.values();

        let target = self.sample_tables(point, 0, &shots.target, seed, ROLE_TARGET)?;
        let target_measured = self.measured(&target)?;
        let mut results: Vec<(Method, Result<(EstimateDistribution, usize)>)> = Vec::new();
        let mut nre = None;
        let mut ncc_measured = None;

        if self.uses_ncc() {
            let ncc = self.sample_tables(point, 1, &shots.ncc, seed, ROLE_NCC)?;
            ncc_measured = Some(self.measured(&ncc)?);
            let pipe_seed = derive_key(seed, &[STAGE_PIPELINE]);
            let set = BootstrapSet::new(
                bootstrap_series(&target, &self.groups, b, pipe_seed, 0)?,
                bootstrap_series(&ncc, &self.groups, b, pipe_seed, 1)?,
            )?;
            if cfg.wants(Method::Nre) || cfg.wants(Method::NreBaseline) {
                let pcfg = PipelineConfig {
                    bootstraps: b,
                    resamples: cfg.resamples,
                    weight_floor: cfg.weight_floor,
                    seed: pipe_seed,
                    baseline_only: !cfg.wants(Method::Nre),
                    keep_pooled,
                };
                let out = run_nre_on_bootstrap(&set, &self.grid, self.ncc_noiseless, &pcfg);
                if cfg.wants(Method::Nre) {
                    results.push((Method::Nre, out.as_ref().map(|o| (o.final_estimates.clone(), 0)).map_err(Clone::clone)));
                }
                if cfg.wants(Method::NreBaseline) {
                    results.push((Method::NreBaseline, out.as_ref().map(|o| (o.baselines.clone(), 0)).map_err(Clone::clone)));
                }
                nre = out.ok();
            }
            if cfg.wants(Method::Urbanek) {
                let r = per_replicate(b, |s| {
                    urbanek_from_values(lambdas, &set.target_at(s), &set.ncc_at(s), self.ncc_noiseless, cfg.urbanek_fit)
                        .map(|r| r.value)
                });
                results.push((Method::Urbanek, r));
            }
        }

        if cfg.wants(Method::Zne) || cfg.wants(Method::Richardson) {
            let zne_tables = if self.uses_ncc() {
                let extra = self.sample_tables(point, 0, &shots.target_extra, seed, ROLE_TARGET_EXTRA)?;
                target
                    .iter()
                    .zip(&extra)
                    .map(|(a, e)| a.iter().zip(e).map(|(x, y)| x.merged(y)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?
            } else {
                target.clone()
            };
            let series = bootstrap_series(&zne_tables, &self.groups, b, derive_key(seed, &[STAGE_ZNE]), 0)?;
            let at = |s: usize| series.iter().map(|v| v[s]).collect::<Vec<f64>>();
            if cfg.wants(Method::Zne) {
                let r = per_replicate(b, |s| {
                    let y = at(s);
                    let fit = if cfg.zne_offset {
                        exponential_offset_fit(lambdas, &y)
                    } else {
                        exponential_fit(lambdas, &y)
                    };
                    fit.map(|r| r.value)
                });
                results.push((Method::Zne, r));
            }
            if cfg.wants(Method::Richardson) {
                results.push((Method::Richardson, per_replicate(b, |s| richardson_from_values(lambdas, &at(s)))));
            }
        }

        let mut distributions = Vec::new();
        let mut discards = Vec::new();
        let mut failures = Vec::new();
        for (m, r) in results {
            match r {
                Ok((d, bad)) => {
                    distributions.push((m, d));
                    discards.push(bad);
                }
                Err(e) if recoverable(&e) => failures.push(MethodFailure {
                    method: m,
                    error: e.to_string(),
                }),
                Err(e) => return Err(e),
            }
        }

        let methods = distributions
            .iter()
            .zip(&discards)
            .map(|((m, d), &discarded)| {
                Ok(MethodSummary {
                    method: *m,
                    mean: d.mean,
                    std: d.std,
                    relative_bias: relative_bias(d.mean, self.target_noiseless)?,
                    discarded,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let per_lambda = lambdas
            .iter()
            .enumerate()
            .map(|(i, &lambda)| LambdaReport {
                lambda,
                implemented_lambda: point.implemented[i],
                target_exact: point.exact_target[i],
                ncc_exact: point.exact_ncc[i],
                target_measured: target_measured[i],
                ncc_measured: ncc_measured.as_ref().map(|v: &Vec<f64>| v[i]),
                target_ratio: point.exact_target[i] / self.target_noiseless,
                ncc_ratio: point.exact_ncc[i] / self.ncc_noiseless,
            })
            .collect();

        let nre_pipeline = nre.as_ref().map(|out| {
            let pcfg = PipelineConfig {
                bootstraps: b,
                resamples: cfg.resamples,
                baseline_only: !cfg.wants(Method::Nre),
                ..PipelineConfig::default()
            };
            PipelineReport::new(
                out,
                &pcfg,
                &self.grid,
                &target_measured,
                ncc_measured.as_deref().unwrap_or(&[]),
            )
        });

        Ok(NoiseLevelOutcome {
            report: NoiseLevelReport {
                f: point.f,
                seed,
                shots,
                per_lambda,
                methods,
                failures,
                nre_pipeline,
            },
            distributions,
            nre,
        })
    }

    /// Seed of the `i`-th noise level of a comparison run.
    pub fn level_seed(&self, i: usize) -> u64 {
        derive_key(self.config.seed, &[STAGE_LEVEL, i as u64])
    }
}

/// Errors that mean "this method cannot handle this data" rather than a bug or
/// a bad configuration.
fn recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::SignViolation { .. }
            | Error::ExcessiveSignViolations { .. }
            | Error::FitFailure(_)
            | Error::DegenerateDispersion
    )
}

/// Evaluates `estimate` on every replicate; failed replicates are dropped. More
/// than half failing is an error.
fn per_replicate(b: usize, estimate: impl Fn(usize) -> Result<f64>) -> Result<(EstimateDistribution, usize)> {
    let mut out = Vec::with_capacity(b);
    let mut last_err = None;
    for s in 0..b {
        match estimate(s) {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => last_err = Some(Error::FitFailure("non-finite estimate".into())),
            Err(e @ (Error::SignViolation { .. } | Error::FitFailure(_))) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let bad = b - out.len();
    if 2 * bad > b {
        return Err(last_err.expect("failures recorded"));
    }
    Ok((EstimateDistribution::from_samples(out), bad))
}

/// Runs every noise rate of the configuration and assembles the report.
pub fn run_compare(config: &ExperimentConfig) -> Result<RunReport> {
    let exp = Experiment::new(config.clone())?;
    let levels = config
        .f
        .par_iter()
        .enumerate()
        .map(|(i, &f)| {
            let point = exp.prepare(f)?;
            Ok(exp.run_point(&point, exp.level_seed(i), false)?.report)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunReport {
        config_hash: config.hash(),
        seed: config.seed,
        config: config.clone(),
        n_qubits: exp.topology.n(),
        n_tqg: exp.n_tqg,
        target_noiseless: exp.target_noiseless,
        ncc_noiseless: exp.ncc_noiseless,
        ground_energy: exp.ground_energy,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        ExperimentConfig::from_json(r#"{"p": 2, "f": [0.0, 0.01], "shots_total": 24000, "B": 20, "R": 200, "seed": 11}"#)
            .unwrap()
    }

    #[test]
    fn relative_bias_examples() {
        assert_eq!(relative_bias(-10.0, -10.0).unwrap(), 0.0);
        assert_eq!(relative_bias(0.0, -10.0).unwrap(), 1.0);
        assert!((relative_bias(-9.5, -10.0).unwrap() - 0.05).abs() < 1e-15);
        assert!(relative_bias(1.0, 0.0).is_err());
    }

    #[test]
    fn budget_is_conserved() {
        for total in [12u64, 13, 600_000, 600_007] {
            let a = ShotAllocation::new(total, 3, 2, true).unwrap();
            assert_eq!(a.ncc_methods_total(), total);
            assert_eq!(a.target_only_total(), total);
            let b = ShotAllocation::new(total, 3, 2, false).unwrap();
            assert_eq!(b.ncc_methods_total(), total);
        }
        assert!(ShotAllocation::new(11, 3, 2, true).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = serde_json::to_string(&run_compare(&quick()).unwrap()).unwrap();
        let b = serde_json::to_string(&run_compare(&quick()).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_rate_has_only_shot_noise() {
        let cfg = quick();
        let report = run_compare(&cfg).unwrap();
        let level = &report.levels[0];
        let per_coordinate = cfg.shots_total as f64 / 12.0;
        for m in &level.methods {
            // energies are sums of up to nine ±1-valued terms with coefficients up to 2
            assert!(m.relative_bias < 20.0 / per_coordinate.sqrt(), "{:?}", m);
        }
        for l in &level.per_lambda {
            assert!((l.target_ratio - 1.0).abs() < 1e-12);
            assert!((l.ncc_ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn folded_scale_factors_are_reported() {
        let report = run_compare(&quick()).unwrap();
        let l = &report.levels[1].per_lambda;
        assert_eq!(l[0].implemented_lambda, 1.0);
        assert!((l[2].implemented_lambda - 3.0).abs() < 1e-12);
        assert!(l[1].target_ratio < 1.0 && l[2].target_ratio < l[1].target_ratio);
    }
}
