use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rotation_matrix;
use crate::circuit::{Circuit, Gate, MeasurementGroup};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_QUBITS: usize = 10;

/// How the noise scale factor λ is realized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Amplification {
    /// The circuit is already folded; the base rate is used unchanged.
    Folded,
    /// The unfolded circuit is simulated at rate `λ·f`.
    RateScaled,
    /// Rate-scaled at the implemented scale factors `λ_1, λ_1 + t_1, …` while
    /// post-processing assumes the intended grid.
    Perturbed { spacings: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Depolarizing probability per qubit per CZ.
    pub rate: f64,
    pub mode: Amplification,
}

impl NoiseSpec {
    pub fn new(rate: f64, mode: Amplification) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidNoise(format!("rate {rate} outside [0, 1)")));
        }
        if let Amplification::Perturbed { spacings } = &mode {
            if spacings.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::InvalidNoise("spacings must be positive".into()));
            }
        }
        Ok(Self { rate, mode })
    }

    pub fn noiseless() -> Self {
        Self {
            rate: 0.0,
            mode: Amplification::RateScaled,
        }
    }

    /// Per-qubit depolarizing probability applied after each CZ at scale `lambda`.
    pub fn effective_rate(&self, lambda: f64) -> Result<f64> {
        let eff = match self.mode {
            Amplification::Folded => self.rate,
            Amplification::RateScaled | Amplification::Perturbed { .. } => lambda * self.rate,
        };
        if !(lambda > 0.0) || lambda * self.rate >= 1.0 {
            return Err(Error::InvalidNoise(format!(
                "lambda * f = {} must lie in [0, 1)",
                lambda * self.rate
            )));
        }
        Ok(eff)
    }

    /// Scale factors actually realized for an intended grid. Only the perturbed
    /// mode differs from the intended grid.
    pub fn implemented_lambdas(&self, intended: &[f64]) -> Result<Vec<f64>> {
        match &self.mode {
            Amplification::Perturbed { spacings } => {
                if spacings.len() + 1 != intended.len() {
                    return Err(Error::LengthMismatch(format!(
                        "{} spacings for {} scale factors",
                        spacings.len(),
                        intended.len()
                    )));
                }
                let mut out = vec![intended[0]];
                for t in spacings {
                    out.push(out.last().unwrap() + t);
                }
                Ok(out)
            }
            _ => Ok(intended.to_vec()),
        }
    }
}

/// Row-major `2^n × 2^n` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Self { n, dim, data }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { n, dim, data }
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn from_pure(state: &[Complex64]) -> Self {
        let dim = state.len();
        assert!(dim.is_power_of_two());
        let n = dim.trailing_zeros() as usize;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = state[r] * state[c].conj();
            }
        }
        Self { n, dim, data }
    }

    pub fn from_matrix(m: &DMatrix<Complex64>) -> Self {
        let dim = m.nrows();
        assert!(dim.is_power_of_two() && m.ncols() == dim);
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(m[(r, c)]);
            }
        }
        Self {
            n: dim.trailing_zeros() as usize,
            dim,
            data,
        }
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Diagonal of ρ in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// Checks unit trace, Hermiticity and positive semidefiniteness.
    pub fn check_invariants(&self, tol: f64, eig_tol: f64) -> std::result::Result<(), String> {
        let tr = self.trace();
        if (tr - 1.0).norm() > tol {
            return Err(format!("trace {tr}"));
        }
        for r in 0..self.dim {
            for c in r..self.dim {
                if (self.get(r, c) - self.get(c, r).conj()).norm() > tol {
                    return Err(format!("not Hermitian at ({r}, {c})"));
                }
            }
        }
        let eig = self.to_matrix().symmetric_eigenvalues();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -eig_tol {
            return Err(format!("negative eigenvalue {min}"));
        }
        Ok(())
    }

    /// `ρ ← U ρ U†` for a single-qubit `U` on `qubit`.
    pub fn apply_single(&mut self, qubit: usize, u: &[[Complex64; 2]; 2]) {
        let m = 1usize << qubit;
        let dim = self.dim;
        // left: rows
        for r in 0..dim {
            if r & m != 0 {
                continue;
            }
            let (r0, r1) = (r * dim, (r | m) * dim);
            for c in 0..dim {
                let (a, b) = (self.data[r0 + c], self.data[r1 + c]);
                self.data[r0 + c] = u[0][0] * a + u[0][1] * b;
                self.data[r1 + c] = u[1][0] * a + u[1][1] * b;
            }
        }
        // right: columns, multiply by U†
        let (v00, v01, v10, v11) = (u[0][0].conj(), u[0][1].conj(), u[1][0].conj(), u[1][1].conj());
        for r in 0..dim {
            let row = r * dim;
            for c in 0..dim {
                if c & m != 0 {
                    continue;
                }
                let (a, b) = (self.data[row + c], self.data[row + (c | m)]);
                self.data[row + c] = a * v00 + b * v01;
                self.data[row + (c | m)] = a * v10 + b * v11;
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let m = (1usize << a) | (1usize << b);
        let dim = self.dim;
        for r in 0..dim {
            let sr = r & m == m;
            for c in 0..dim {
                if sr != (c & m == m) {
                    let x = &mut self.data[r * dim + c];
                    *x = -*x;
                }
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        match *gate {
            Gate::Cz { control, target } => self.apply_cz(control, target),
            Gate::Rotation { axis, angle, qubit } => {
                self.apply_single(qubit, &rotation_matrix(axis, angle))
            }
        }
    }

    /// Single-qubit depolarizing channel with probability `p`:
    /// `ρ → (1 − p) ρ + (p/3)(XρX + YρY + ZρZ)`. Every nontrivial Pauli
    /// component on `qubit` shrinks by `1 − 4p/3`.
    pub fn depolarize(&mut self, qubit: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let keep = 1.0 - 4.0 * p / 3.0;
        let mix = 4.0 * p / 3.0;
        let m = 1usize << qubit;
        let dim = self.dim;
        for r in 0..dim {
            if r & m != 0 {
                continue;
            }
            let r1 = r | m;
            for c in 0..dim {
                if c & m != 0 {
                    continue;
                }
                let c1 = c | m;
                let d0 = self.data[r * dim + c];
                let d1 = self.data[r1 * dim + c1];
                let avg = 0.5 * (d0 + d1);
                self.data[r * dim + c] = keep * d0 + mix * avg;
                self.data[r1 * dim + c1] = keep * d1 + mix * avg;
                self.data[r * dim + c1] *= keep;
                self.data[r1 * dim + c] *= keep;
            }
        }
    }
}

pub fn simulate_density(circuit: &Circuit, noise: &NoiseSpec, lambda: f64) -> Result<DensityMatrix> {
    simulate_density_with_cap(circuit, noise, lambda, DEFAULT_MAX_QUBITS)
}

/// Runs the circuit from `|0…0⟩`, depolarizing both qubits of every CZ right
/// after the gate. Single-qubit gates are noiseless.
pub fn simulate_density_with_cap(
    circuit: &Circuit,
    noise: &NoiseSpec,
    lambda: f64,
    max_qubits: usize,
) -> Result<DensityMatrix> {
    if circuit.width() > max_qubits {
        return Err(Error::WidthOverCap {
            width: circuit.width(),
            cap: max_qubits,
        });
    }
    let p = noise.effective_rate(lambda)?;
    let mut rho = DensityMatrix::zero_state(circuit.width());
    for g in circuit.gates() {
        rho.apply_gate(g);
        if let Gate::Cz { control, target } = *g {
            rho.depolarize(control, p);
            rho.depolarize(target, p);
        }
    }
    Ok(rho)
}

/// Computational-basis distribution after the group's basis rotation.
pub(crate) fn rotated_probabilities(rho: &DensityMatrix, group: &MeasurementGroup) -> Vec<f64> {
    if group.rotation.is_empty() {
        return rho.probabilities();
    }
    let mut r = rho.clone();
    for g in &group.rotation {
        r.apply_gate(g);
    }
    r.probabilities()
}

/// `Σ_terms coeff · tr(ρ' Z_support)` with `ρ'` the rotated state.
pub fn exact_expectation(rho: &DensityMatrix, group: &MeasurementGroup) -> f64 {
    assert_eq!(group.width, rho.n(), "group width does not match the state");
    let probs = rotated_probabilities(rho, group);
    group
        .terms
        .iter()
        .map(|t| {
            let mask = t.mask() as usize;
            let z: f64 = probs
                .iter()
                .enumerate()
                .map(|(x, p)| if (x & mask).count_ones() % 2 == 0 { *p } else { -*p })
                .sum();
            t.coeff * z
        })
        .sum()
}
