//! Dense simulation of `{CZ, rotation}` circuits.
//!
//! Basis index convention: qubit `q` is bit `q` of the basis-state index.

pub(crate) mod counts;
mod density;
mod hamiltonian;
mod pauli;
mod unitary;

pub use counts::{expectation_from_counts, sample_counts, CountsRecord, CountsTable};
pub use density::{
    exact_expectation, simulate_density, simulate_density_with_cap, Amplification, DensityMatrix,
    NoiseSpec, DEFAULT_MAX_QUBITS,
};
pub(crate) use density::rotated_probabilities;
pub use hamiltonian::{exact_ground_energy, tfim_hamiltonian};
pub use pauli::{clifford_pauli_oracle, Pauli, PauliString};
pub use unitary::{apply_gate_to_state, circuit_unitary, operator_distance};

use num_complex::Complex64;

use crate::circuit::Axis;

/// `exp(-i θ σ_axis / 2)`.
pub fn rotation_matrix(axis: Axis, theta: f64) -> [[Complex64; 2]; 2] {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    match axis {
        Axis::X => [[re(c), im(-s)], [im(-s), re(c)]],
        Axis::Y => [[re(c), re(-s)], [re(s), re(c)]],
        Axis::Z => [[Complex64::new(c, -s), re(0.0)], [re(0.0), Complex64::new(c, s)]],
    }
}
