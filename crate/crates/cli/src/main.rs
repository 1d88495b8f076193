//! `nre`: command-line front end for the nrelab error-mitigation laboratory.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use nrelab::circuit::{build_tfim_qaoa, fold_global, tfim_measurement_groups, to_noise_canceling, MeasurementGroup, Topology};
use nrelab::harness::{run_compare, sweep_overhead, ExperimentConfig, RunReport};
use nrelab::nre::LambdaGrid;
use nrelab::resampling::{run_nre_pipeline, ObservableCounts, PipelineConfig, PipelineReport};
use nrelab::sim::{CountsRecord, CountsTable};

#[derive(Parser)]
#[command(name = "nre", version, about = "Noise-robust estimation of quantum observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an experiment and compare mitigation methods.
    Run {
        /// Experiment configuration (JSON). Omitted fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "NRE_SEED")]
        seed: Option<u64>,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-lambda expectation values as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Measure sampling overhead across the configured noise rates.
    SweepOverhead {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "NRE_SEED")]
        seed: Option<u64>,
        /// Independent runs per noise rate; defaults to the config value.
        #[arg(long)]
        repetitions: Option<usize>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Full table including variances, as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Post-process externally measured counts with the NRE pipeline.
    MitigateCounts {
        /// Counts files of the target circuit, one (lambda, group) record each.
        #[arg(long, num_args = 1.., required = true)]
        target: Vec<PathBuf>,
        /// Counts files of the noise-canceling circuit.
        #[arg(long, num_args = 1.., required = true)]
        ncc: Vec<PathBuf>,
        /// Noiseless expectation of the noise-canceling circuit.
        #[arg(long, allow_hyphen_values = true)]
        ncc_noiseless: f64,
        /// Measurement groups as JSON; alternative to --topology/--g.
        #[arg(long, conflicts_with_all = ["topology", "g"])]
        groups: Option<PathBuf>,
        /// TFIM topology defining the observable, e.g. star-5 or grid-2x3.
        #[arg(long)]
        topology: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        g: Option<f64>,
        #[arg(long = "bootstraps", short = 'B', default_value_t = 200)]
        bootstraps: usize,
        #[arg(long = "resamples", short = 'R', default_value_t = 40_000)]
        resamples: usize,
        #[arg(long, default_value_t = 1e-6)]
        weight_floor: f64,
        #[arg(long, env = "NRE_SEED", default_value_t = 0)]
        seed: u64,
        /// Skip the dispersion regression (allows two scale factors).
        #[arg(long)]
        baseline_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a target or noise-canceling circuit in the text format.
    EmitCircuit {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Emit the noise-canceling (nearest-Clifford) circuit.
        #[arg(long)]
        ncc: bool,
        /// Globally fold to this scale factor.
        #[arg(long)]
        fold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => "{}".to_string(),
    };
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn per_lambda_csv(report: &RunReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "f",
        "lambda",
        "implemented_lambda",
        "target_exact",
        "ncc_exact",
        "target_measured",
        "ncc_measured",
        "target_ratio",
        "ncc_ratio",
    ])?;
    for level in &report.levels {
        for l in &level.per_lambda {
            w.write_record([
                level.f.to_string(),
                l.lambda.to_string(),
                l.implemented_lambda.to_string(),
                l.target_exact.to_string(),
                l.ncc_exact.to_string(),
                l.target_measured.to_string(),
                l.ncc_measured.map(|v| v.to_string()).unwrap_or_default(),
                l.target_ratio.to_string(),
                l.ncc_ratio.to_string(),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn read_records(paths: &[PathBuf]) -> Result<Vec<CountsRecord>> {
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            CountsRecord::from_text(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

/// Arranges records as `[λ][group]` on the sorted set of scale factors.
fn arrange(records: Vec<CountsRecord>, groups: &[MeasurementGroup], what: &str) -> Result<(Vec<f64>, Vec<Vec<CountsTable>>)> {
    let mut by_lambda: BTreeMap<u64, BTreeMap<String, CountsTable>> = BTreeMap::new();
    for r in records {
        if !groups.iter().any(|g| g.id == r.group) {
            bail!("{what}: counts for unknown measurement group {:?}", r.group);
        }
        let slot = by_lambda.entry(r.lambda.to_bits()).or_default();
        if slot.insert(r.group.clone(), r.table).is_some() {
            bail!("{what}: duplicate counts for group {:?} at lambda {}", r.group, r.lambda);
        }
    }
    let mut lambdas: Vec<f64> = by_lambda.keys().map(|b| f64::from_bits(*b)).collect();
    lambdas.sort_by(f64::total_cmp);
    let mut tables = Vec::new();
    for l in &lambdas {
        let mut row_map = by_lambda.remove(&l.to_bits()).expect("key present");
        let row = groups
            .iter()
            .map(|g| {
                row_map
                    .remove(&g.id)
                    .with_context(|| format!("{what}: missing group {:?} at lambda {l}", g.id))
            })
            .collect::<Result<Vec<_>>>()?;
        tables.push(row);
    }
    Ok((lambdas, tables))
}

#[derive(serde::Serialize)]
struct MitigationReport {
    #[serde(flatten)]
    pipeline: PipelineReport,
    discarded: usize,
    evaluations: usize,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, seed, out, csv } => {
            let config = load_config(config.as_deref(), seed)?;
            let report = run_compare(&config)?;
            if let Some(path) = csv {
                fs::write(&path, per_lambda_csv(&report)?).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
        }
        Command::SweepOverhead { config, seed, repetitions, out, json } => {
            let config = load_config(config.as_deref(), seed)?;
            let k = repetitions.unwrap_or(config.repetitions);
            let table = sweep_overhead(&config, k)?;
            if let Some(path) = json {
                fs::write(&path, serde_json::to_string_pretty(&table)?)?;
            }
            emit(out.as_deref(), &table.to_csv())?;
        }
        Command::MitigateCounts {
            target,
            ncc,
            ncc_noiseless,
            groups,
            topology,
            g,
            bootstraps,
            resamples,
            weight_floor,
            seed,
            baseline_only,
            out,
        } => {
            let groups: Vec<MeasurementGroup> = match (groups, topology, g) {
                (Some(p), _, _) => serde_json::from_str(&fs::read_to_string(&p)?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                (None, Some(t), Some(g)) => tfim_measurement_groups(&Topology::from_name(&t)?, g).to_vec(),
                _ => bail!("give either --groups or both --topology and --g"),
            };
            let (lt, target) = arrange(read_records(&target)?, &groups, "target")?;
            let (ln, ncc) = arrange(read_records(&ncc)?, &groups, "ncc")?;
            if lt != ln {
                bail!("target and ncc counts cover different scale factors: {lt:?} vs {ln:?}");
            }
            let counts = ObservableCounts {
                grid: LambdaGrid::new(lt)?,
                groups,
                target,
                ncc,
            };
            let config = PipelineConfig {
                bootstraps,
                resamples,
                weight_floor,
                seed,
                baseline_only,
                keep_pooled: false,
            };
            let output = run_nre_pipeline(&counts, ncc_noiseless, &config)?;
            let (t, n) = counts.point_estimates()?;
            let report = MitigationReport {
                pipeline: PipelineReport::new(&output, &config, &counts.grid, &t, &n),
                discarded: output.discarded,
                evaluations: output.evaluations,
            };
            emit(out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
        }
        Command::EmitCircuit { config, ncc, fold, out } => {
            let config = load_config(config.as_deref(), None)?;
            let (gammas, betas) = config.qaoa_angles()?;
            let mut circuit = build_tfim_qaoa(&config.topology()?, config.g, config.p, &gammas, &betas)?;
            if ncc {
                circuit = to_noise_canceling(&circuit);
            }
            if let Some(scale) = fold {
                circuit = fold_global(&circuit, scale)?;
            }
            emit(out.as_deref(), &circuit.to_text())?;
        }
    }
    Ok(())
}
