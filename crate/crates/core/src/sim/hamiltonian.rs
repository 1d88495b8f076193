use nalgebra::DMatrix;

use crate::circuit::Topology;
use crate::error::{Error, Result};

/// Dense real matrix of `H = -g Σ X_q - Σ_(i,j) Z_i Z_j`.
pub fn tfim_hamiltonian(topology: &Topology, g: f64) -> DMatrix<f64> {
    let n = topology.n();
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        let zz: f64 = topology
            .edges()
            .iter()
            .map(|&(a, b)| if ((x >> a) ^ (x >> b)) & 1 == 0 { 1.0 } else { -1.0 })
            .sum();
        h[(x, x)] = -zz;
        for q in 0..n {
            h[(x ^ (1 << q), x)] -= g;
        }
    }
    h
}

/// Smallest eigenvalue of the dense TFIM Hamiltonian (up to 12 qubits).
pub fn exact_ground_energy(topology: &Topology, g: f64) -> Result<f64> {
    if topology.n() > 12 {
        return Err(Error::InvalidTopology(format!(
            "{} qubits is beyond the dense eigensolver limit of 12",
            topology.n()
        )));
    }
    let eig = tfim_hamiltonian(topology, g).symmetric_eigenvalues();
    Ok(eig.iter().cloned().fold(f64::INFINITY, f64::min))
}
