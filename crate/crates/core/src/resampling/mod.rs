//! Bootstrap of measurement counts, Gaussian resampling of bootstrapped
//! expectations, and the full two-layer NRE pipeline.

mod bootstrap;
mod pipeline;

pub use bootstrap::{
    bootstrap_counts, bootstrap_expectations, bootstrap_observables, bootstrap_series, gaussian_resample,
    BootstrapSet, ObservableCounts,
};
pub use pipeline::{
    run_nre_on_bootstrap, run_nre_pipeline, EstimateDistribution, LambdaExpectation,
    PipelineConfig, PipelineOutput, PipelineReport, PooledSample,
};

/// Stream identifiers for the stages that draw random numbers.
pub(crate) const STAGE_BOOTSTRAP: u64 = 0xB007;
pub(crate) const STAGE_RESAMPLE: u64 = 0x9E5A;
