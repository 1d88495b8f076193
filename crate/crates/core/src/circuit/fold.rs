use super::{Circuit, Gate};
use crate::error::{Error, Result};

fn inverse_gate(g: &Gate) -> Gate {
    match *g {
        Gate::Rotation { axis, angle, qubit } => Gate::rotation(axis, -angle, qubit),
        cz => cz,
    }
}

/// Reversed sequence of inverted gates. With angles kept in `[0, 2π)` the
/// inverse rotation `R(2π − θ)` equals `R(θ)†` up to a global phase of −1.
pub fn inverse(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(inverse_gate).collect()
}

/// Global unitary folding `G (G†G)^k`, followed by a partial fold `L†L` of the
/// trailing block `L` of `G` for non-odd scale factors. The folded gate count
/// is within one gate of `scale · N`.
pub fn fold_global(circuit: &Circuit, scale: f64) -> Result<Circuit> {
    if !(scale >= 1.0) || !scale.is_finite() {
        return Err(Error::InvalidCircuit(format!(
            "fold scale factor must be >= 1, got {scale}"
        )));
    }
    let n = circuit.len();
    let label = format!("{}@fold{}", circuit.label(), scale);
    if n == 0 {
        return Ok(circuit.clone().with_label(label));
    }

    let target = (scale * n as f64).round() as usize;
    let full = ((scale - 1.0) / 2.0 + 1e-12).floor() as usize;
    let base = (2 * full + 1) * n;
    let extra = target.saturating_sub(base);
    let partial = ((extra as f64) / 2.0).round() as usize;
    let partial = partial.min(n);

    let gates = circuit.gates();
    let inv = inverse(gates);
    let mut out = Vec::with_capacity(base + 2 * partial);
    out.extend_from_slice(gates);
    for _ in 0..full {
        out.extend_from_slice(&inv);
        out.extend_from_slice(gates);
    }
    let tail = &gates[n - partial..];
    out.extend(inverse(tail));
    out.extend_from_slice(tail);

    Circuit::from_gates(circuit.width(), label, out)
}
