use nalgebra::DMatrix;
use num_complex::Complex64;

use super::rotation_matrix;
use crate::circuit::{Circuit, Gate};

pub fn apply_gate_to_state(state: &mut [Complex64], gate: &Gate) {
    match *gate {
        Gate::Cz { control, target } => {
            let m = (1usize << control) | (1usize << target);
            for (i, amp) in state.iter_mut().enumerate() {
                if i & m == m {
                    *amp = -*amp;
                }
            }
        }
        Gate::Rotation { axis, angle, qubit } => {
            let u = rotation_matrix(axis, angle);
            let m = 1usize << qubit;
            for i in 0..state.len() {
                if i & m == 0 {
                    let (a, b) = (state[i], state[i | m]);
                    state[i] = u[0][0] * a + u[0][1] * b;
                    state[i | m] = u[1][0] * a + u[1][1] * b;
                }
            }
        }
    }
}

/// Dense `2^n × 2^n` unitary of a circuit.
pub fn circuit_unitary(circuit: &Circuit) -> DMatrix<Complex64> {
    let dim = 1usize << circuit.width();
    let mut u = DMatrix::zeros(dim, dim);
    let mut col = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..dim {
        col.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        for g in circuit.gates() {
            apply_gate_to_state(&mut col, g);
        }
        for (i, a) in col.iter().enumerate() {
            u[(i, j)] = *a;
        }
    }
    u
}

/// Frobenius distance minimized over a global phase, `min_φ ‖U − e^{iφ} V‖_F`.
/// The optimal phase is `arg tr(U† V)`; the norm is then taken directly rather
/// than through `sqrt(‖U‖² + ‖V‖² − 2|tr(U† V)|)`, which loses half the digits.
pub fn operator_distance(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> f64 {
    assert_eq!(u.shape(), v.shape());
    let overlap: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    u.iter().zip(v.iter()).map(|(a, b)| (a - phase * b).norm_sqr()).sum::<f64>().sqrt()
}
