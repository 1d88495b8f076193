//! Noise-robust estimation (NRE) of quantum observables.
//!
//! The crate is a small error-mitigation laboratory:
//!
//! * [`circuit`]: gate-level circuits in the `{CZ, rotation}` gate set, TFIM/QAOA
//!   circuit generation, noise-canceling (nearest-Clifford) circuits and global
//!   unitary folding.
//! * [`sim`]: dense density-matrix simulation under local depolarizing noise,
//!   shot sampling into counts, and a Pauli-propagation oracle for Clifford
//!   circuits.
//! * [`nre`]: the auxiliary quantity, finite-difference and Taylor weights, the
//!   optimal control parameter, the baseline estimator and the normalized
//!   dispersion.
//! * [`resampling`]: bootstrap of counts, Gaussian resampling and the full
//!   two-layer pipeline.
//! * [`estimators`]: the dispersion-weighted regression plus the ZNE, Richardson
//!   and Urbanek-style comparators.
//! * [`harness`]: experiment configuration, comparison runs and the
//!   sampling-overhead sweep.

pub mod circuit;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod nre;
pub mod resampling;
pub mod rng;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
