//! Transverse-field Ising model circuits and measurement groups.
//!
//! `H = -g Σ_q X_q - Σ_(i,j) Z_i Z_j`. The QAOA-style ansatz prepares `|+⟩^n`
//! and alternates `exp(-iγ H_ZZ)` with `exp(-iβ H_X)` for `p` layers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Circuit, Gate};
use crate::error::{Error, Result};

pub const ZZ_GROUP_ID: &str = "z";
pub const MIXER_GROUP_ID: &str = "x";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::InvalidTopology(format!(
                    "edge ({a}, {b}) references a qubit outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidTopology(format!("self-loop on qubit {a}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &edges {
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidTopology(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self { n, edges })
    }

    /// Qubit 0 at the center, coupled to every other qubit.
    pub fn star(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|q| (0, q)).collect())
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|q| (q - 1, q)).collect())
    }

    /// Square grid with row-major qubit numbering.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let q = r * cols + c;
                if c + 1 < cols {
                    edges.push((q, q + 1));
                }
                if r + 1 < rows {
                    edges.push((q, q + cols));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    /// Parses `star-<n>`, `line-<n>` or `grid-<rows>x<cols>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let bad = || Error::InvalidTopology(format!("unknown topology `{name}`"));
        let (kind, arg) = name.split_once('-').ok_or_else(bad)?;
        match kind {
            "star" => Self::star(arg.parse().map_err(|_| bad())?),
            "line" => Self::line(arg.parse().map_err(|_| bad())?),
            "grid" => {
                let (r, c) = arg.split_once('x').ok_or_else(bad)?;
                Self::grid(r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?)
            }
            _ => Err(bad()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// `coeff · Π_{q ∈ support} Z_q`, measured after the group's basis rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub support: Vec<usize>,
}

impl PauliTerm {
    pub fn mask(&self) -> u64 {
        self.support.iter().fold(0u64, |m, &q| m | (1 << q))
    }
}

/// A set of commuting terms measured together in the computational basis after
/// applying `rotation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementGroup {
    pub id: String,
    pub width: usize,
    pub rotation: Vec<Gate>,
    pub terms: Vec<PauliTerm>,
}

/// Adds `exp(-i φ Z_a Z_b / 2)` (up to global phase) using two CZ gates: the
/// target is conjugated into the X frame so that `CZ·R_X(φ)·CZ = exp(-iφ Z_a X_b/2)`.
fn push_zz(gates: &mut Vec<Gate>, a: usize, b: usize, phi: f64) {
    gates.push(Gate::ry(PI / 2.0, b));
    gates.push(Gate::cz(a, b));
    gates.push(Gate::rx(phi, b));
    gates.push(Gate::cz(a, b));
    gates.push(Gate::ry(1.5 * PI, b));
}

/// QAOA ansatz for the TFIM: `|+⟩^n`, then per layer `exp(-iγ_l H_ZZ)` followed by
/// `exp(-iβ_l H_X)` with `H_ZZ = -Σ Z_iZ_j` and `H_X = -g Σ X_q`. Every edge costs
/// two CZ gates per layer.
pub fn build_tfim_qaoa(
    topology: &Topology,
    g: f64,
    p: usize,
    gammas: &[f64],
    betas: &[f64],
) -> Result<Circuit> {
    let n = topology.n();
    if n == 0 {
        return Err(Error::InvalidTopology("empty topology".into()));
    }
    if p == 0 {
        return Err(Error::InvalidCircuit("QAOA needs at least one layer".into()));
    }
    if gammas.len() != p || betas.len() != p {
        return Err(Error::LengthMismatch(format!(
            "expected {p} gammas and betas, got {} and {}",
            gammas.len(),
            betas.len()
        )));
    }

    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(Gate::ry(PI / 2.0, q));
    }
    for (&gamma, &beta) in gammas.iter().zip(betas) {
        // exp(+iγ Z_aZ_b) = exp(-i(-2γ) Z_aZ_b / 2)
        for &(a, b) in topology.edges() {
            push_zz(&mut gates, a, b, -2.0 * gamma);
        }
        // exp(+iβ g X) = R_X(-2 g β)
        for q in 0..n {
            gates.push(Gate::rx(-2.0 * g * beta, q));
        }
    }
    Circuit::from_gates(n, format!("tfim-qaoa-n{n}-p{p}"), gates)
}

/// Two groups: `Z_iZ_j` per edge (coefficient −1, no rotation) and `X_q` per
/// qubit (coefficient −g), read out in Z after `R_Y(3π/2)` on every qubit.
pub fn tfim_measurement_groups(topology: &Topology, g: f64) -> [MeasurementGroup; 2] {
    let n = topology.n();
    let zz = MeasurementGroup {
        id: ZZ_GROUP_ID.into(),
        width: n,
        rotation: Vec::new(),
        terms: topology
            .edges()
            .iter()
            .map(|&(a, b)| PauliTerm { coeff: -1.0, support: vec![a, b] })
            .collect(),
    };
    let x = MeasurementGroup {
        id: MIXER_GROUP_ID.into(),
        width: n,
        rotation: (0..n).map(|q| Gate::ry(1.5 * PI, q)).collect(),
        terms: (0..n).map(|q| PauliTerm { coeff: -g, support: vec![q] }).collect(),
    };
    [zz, x]
}
