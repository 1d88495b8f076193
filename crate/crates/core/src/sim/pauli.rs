//! Heisenberg-picture Pauli propagation through Clifford circuits.
//!
//! Used as an independent oracle for the density-matrix simulator: a Z-string
//! is conjugated backward gate by gate, and each depolarizing site shrinks the
//! coefficient by `1 − 4p/3` when the propagated Pauli acts on that qubit.

use crate::circuit::{is_clifford_angle, Axis, Circuit, Gate, MeasurementGroup};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `a · b = i^k · c`, returned as `(k, c)`.
    fn mul(a: Pauli, b: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    /// `R_axis(π/2)† P R_axis(π/2)` as `(sign, P')`.
    fn quarter_turn(axis: Axis, p: Pauli) -> (i8, Pauli) {
        use Pauli::*;
        match (axis, p) {
            (_, I) => (1, I),
            (Axis::Z, Z) | (Axis::X, X) | (Axis::Y, Y) => (1, p),
            (Axis::Z, X) => (-1, Y),
            (Axis::Z, Y) => (1, X),
            (Axis::X, Y) => (-1, Z),
            (Axis::X, Z) => (1, Y),
            (Axis::Y, Z) => (-1, X),
            (Axis::Y, X) => (1, Z),
        }
    }
}

/// `i^phase · ⊗_q ops[q]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    pub ops: Vec<Pauli>,
    pub phase: u8,
}

impl PauliString {
    pub fn z_string(width: usize, support: &[usize]) -> Self {
        let mut ops = vec![Pauli::I; width];
        for &q in support {
            ops[q] = Pauli::Z;
        }
        Self { ops, phase: 0 }
    }

    pub fn weight_on(&self, q: usize) -> bool {
        self.ops[q] != Pauli::I
    }

    fn mul_assign_site(&mut self, q: usize, p: Pauli) {
        let (k, r) = Pauli::mul(self.ops[q], p);
        self.ops[q] = r;
        self.phase = (self.phase + k) % 4;
    }

    /// `CZ P CZ` (CZ is self-inverse and Hermitian).
    fn conjugate_cz(&mut self, a: usize, b: usize) {
        let (pa, pb) = (self.ops[a], self.ops[b]);
        self.ops[a] = Pauli::I;
        self.ops[b] = Pauli::I;
        // images: X_a → X_a Z_b, Y_a → Y_a Z_b, X_b → Z_a X_b, Y_b → Z_a Y_b
        for (q, other, p) in [(a, b, pa), (b, a, pb)] {
            self.mul_assign_site(q, p);
            if matches!(p, Pauli::X | Pauli::Y) {
                self.mul_assign_site(other, Pauli::Z);
            }
        }
    }

    fn conjugate_rotation(&mut self, axis: Axis, quarter_turns: usize, q: usize) {
        for _ in 0..quarter_turns {
            let (s, p) = Pauli::quarter_turn(axis, self.ops[q]);
            self.ops[q] = p;
            if s < 0 {
                self.phase = (self.phase + 2) % 4;
            }
        }
    }

    /// `⟨0…0| P |0…0⟩`.
    fn zero_state_value(&self) -> f64 {
        if self.ops.iter().any(|p| matches!(p, Pauli::X | Pauli::Y)) {
            return 0.0;
        }
        match self.phase {
            0 => 1.0,
            2 => -1.0,
            _ => unreachable!("Hermitian Pauli strings keep a real phase"),
        }
    }
}

fn quarter_turns(angle: f64) -> Result<usize> {
    if !is_clifford_angle(angle) {
        return Err(Error::NonClifford(angle));
    }
    Ok((angle / std::f64::consts::FRAC_PI_2).round() as usize % 4)
}

/// Exact noisy expectation of a measurement group for an all-Clifford circuit in
/// rate-scaled mode (per-qubit depolarizing probability `lambda · rate` after
/// every CZ).
pub fn clifford_pauli_oracle(
    circuit: &Circuit,
    group: &MeasurementGroup,
    rate: f64,
    lambda: f64,
) -> Result<f64> {
    let p = lambda * rate;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidNoise(format!("lambda * f = {p} outside [0, 1)")));
    }
    let shrink = 1.0 - 4.0 * p / 3.0;
    // validate before doing any work
    let all_gates: Vec<&Gate> = circuit.gates().iter().chain(group.rotation.iter()).collect();
    for g in &all_gates {
        if let Gate::Rotation { angle, .. } = g {
            quarter_turns(*angle)?;
        }
    }

    let mut total = 0.0;
    for term in &group.terms {
        let mut pauli = PauliString::z_string(circuit.width(), &term.support);
        let mut coeff = term.coeff;
        // walk backward; the group rotation is the last noiseless layer
        for g in group.rotation.iter().rev().chain(circuit.gates().iter().rev()) {
            match *g {
                Gate::Rotation { axis, angle, qubit } => {
                    pauli.conjugate_rotation(axis, quarter_turns(angle)?, qubit)
                }
                Gate::Cz { control, target } => {
                    for q in [control, target] {
                        if pauli.weight_on(q) {
                            coeff *= shrink;
                        }
                    }
                    pauli.conjugate_cz(control, target);
                }
            }
        }
        total += coeff * pauli.zero_state_value();
    }
    Ok(total)
}
