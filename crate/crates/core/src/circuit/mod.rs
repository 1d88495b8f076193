//! Gate-level circuits over the `{CZ, single-qubit rotation}` gate set.
//!
//! Circuits in this crate are authored directly in this gate set. The only
//! non-Clifford gates are rotations, which is what makes the nearest-Clifford
//! construction in [`clifford`] a pure per-gate substitution.

mod clifford;
mod fold;
mod tfim;

pub use clifford::{closest_clifford_angle, is_clifford_angle, to_noise_canceling, CLIFFORD_ANGLES};
pub use fold::{fold_global, inverse};
pub use tfim::{
    build_tfim_qaoa, tfim_measurement_groups, MeasurementGroup, PauliTerm, Topology,
    MIXER_GROUP_ID, ZZ_GROUP_ID,
};

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "X" | "x" => Some(Axis::X),
            "Y" | "y" => Some(Axis::Y),
            "Z" | "z" => Some(Axis::Z),
            _ => None,
        }
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Cz { control: usize, target: usize },
    /// `exp(-i θ σ_axis / 2)` with `θ ∈ [0, 2π)`.
    Rotation { axis: Axis, angle: f64, qubit: usize },
}

impl Gate {
    pub fn cz(control: usize, target: usize) -> Self {
        Gate::Cz { control, target }
    }

    /// Rotation gate; the angle is wrapped into `[0, 2π)`.
    pub fn rotation(axis: Axis, angle: f64, qubit: usize) -> Self {
        Gate::Rotation {
            axis,
            angle: normalize_angle(angle),
            qubit,
        }
    }

    pub fn rx(angle: f64, qubit: usize) -> Self {
        Self::rotation(Axis::X, angle, qubit)
    }

    pub fn ry(angle: f64, qubit: usize) -> Self {
        Self::rotation(Axis::Y, angle, qubit)
    }

    pub fn rz(angle: f64, qubit: usize) -> Self {
        Self::rotation(Axis::Z, angle, qubit)
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cz { .. })
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Cz { control, target } => vec![control, target],
            Gate::Rotation { qubit, .. } => vec![qubit],
        }
    }

    fn validate(&self, width: usize) -> Result<()> {
        match *self {
            Gate::Cz { control, target } => {
                if control >= width || target >= width {
                    return Err(Error::InvalidCircuit(format!(
                        "CZ({control}, {target}) outside width {width}"
                    )));
                }
                if control == target {
                    return Err(Error::InvalidCircuit(format!(
                        "CZ acts twice on qubit {control}"
                    )));
                }
            }
            Gate::Rotation { angle, qubit, .. } => {
                if qubit >= width {
                    return Err(Error::InvalidCircuit(format!(
                        "rotation on qubit {qubit} outside width {width}"
                    )));
                }
                if !(0.0..TAU).contains(&angle) {
                    return Err(Error::InvalidCircuit(format!(
                        "rotation angle {angle} outside [0, 2π)"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Cz { control, target } => write!(f, "CZ {control} {target}"),
            Gate::Rotation { axis, angle, qubit } => {
                write!(f, "R {} {:.16e} {}", axis.symbol(), angle, qubit)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
    label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub total: usize,
    pub two_qubit: usize,
    pub depth: usize,
}

impl Circuit {
    pub fn new(width: usize, label: impl Into<String>) -> Self {
        Self {
            width,
            gates: Vec::new(),
            label: label.into(),
        }
    }

    pub fn from_gates(width: usize, label: impl Into<String>, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(width, label);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Total gates, two-qubit gates and depth under greedy layering.
    pub fn gate_counts(&self) -> GateCounts {
        let mut level = vec![0usize; self.width];
        let mut depth = 0;
        for g in &self.gates {
            let qs = g.qubits();
            let layer = qs.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for q in qs {
                level[q] = layer;
            }
            depth = depth.max(layer);
        }
        GateCounts {
            total: self.gates.len(),
            two_qubit: self.gates.iter().filter(|g| g.is_two_qubit()).count(),
            depth,
        }
    }

    /// Line-oriented text form: a `qubits <n> label <text>` header and one gate
    /// per line (`CZ q1 q2` or `R axis theta q`).
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {} label {}\n", self.width, self.label);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: "empty circuit text".into(),
        })?;
        let perr = |line: usize, message: &str| Error::Parse {
            line,
            message: message.to_string(),
        };
        let mut parts = header.splitn(4, char::is_whitespace);
        if parts.next() != Some("qubits") {
            return Err(perr(hline, "expected `qubits <n> label <text>` header"));
        }
        let width: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| perr(hline, "bad qubit count"))?;
        if parts.next() != Some("label") {
            return Err(perr(hline, "expected `label` after qubit count"));
        }
        let label = parts.next().unwrap_or("").trim().to_string();

        let mut circuit = Circuit::new(width, label);
        for (ln, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let gate = match tok.as_slice() {
                ["CZ", a, b] => Gate::Cz {
                    control: a.parse().map_err(|_| perr(ln, "bad qubit index"))?,
                    target: b.parse().map_err(|_| perr(ln, "bad qubit index"))?,
                },
                ["R", axis, theta, q] => Gate::Rotation {
                    axis: Axis::parse(axis).ok_or_else(|| perr(ln, "bad rotation axis"))?,
                    angle: theta.parse().map_err(|_| perr(ln, "bad rotation angle"))?,
                    qubit: q.parse().map_err(|_| perr(ln, "bad qubit index"))?,
                },
                _ => return Err(perr(ln, "unrecognized gate line")),
            };
            circuit.push(gate).map_err(|e| perr(ln, &e.to_string()))?;
        }
        Ok(circuit)
    }
}
