//! Experiment orchestration: configuration, comparison runs across methods and
//! the sampling-overhead sweep.

mod config;
mod overhead;
mod run;

pub use config::{default_qaoa_angles, ExperimentConfig, LambdaSpec, Method, DEFAULT_BETA_MAX, DEFAULT_GAMMA_MAX};
pub use overhead::{fit_overhead, sweep_overhead, OverheadFit, OverheadRow, OverheadTable};
pub use run::{
    relative_bias, run_compare, split_budget, Experiment, LambdaReport, MethodFailure, MethodSummary, NoiseLevelOutcome,
    NoiseLevelReport, NoisePoint, RunReport, ShotAllocation,
};
