use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("circuit width {width} exceeds the simulator cap of {cap} qubits")]
    WidthOverCap { width: usize, cap: usize },

    #[error("non-Clifford rotation angle {0} in a circuit that must be Clifford")]
    NonClifford(f64),

    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error(
        "sign violation at index {index}: noise-canceling value {value} does not share the sign \
         of its noiseless value {noiseless}; the log-ratio term is undefined"
    )]
    SignViolation {
        index: usize,
        value: f64,
        noiseless: f64,
    },

    #[error("noiseless noise-canceling expectation must be nonzero")]
    ZeroNoiseless,

    #[error("target series has zero dispersion while the auxiliary series does not")]
    DegenerateDispersion,

    #[error(
        "{discarded} of {total} Gaussian resamples at bootstrap {bootstrap} violated the \
         constant-sign assumption of the noise-canceling series"
    )]
    ExcessiveSignViolations {
        bootstrap: usize,
        discarded: usize,
        total: usize,
    },

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
