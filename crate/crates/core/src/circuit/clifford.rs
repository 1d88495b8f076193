use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Axis, Circuit, Gate};

pub const CLIFFORD_ANGLES: [f64; 4] = [0.0, PI / 2.0, PI, 1.5 * PI];

const TIE_TOL: f64 = 1e-12;

fn rotation_2x2(axis: Axis, theta: f64) -> [[Complex64; 2]; 2] {
    crate::sim::rotation_matrix(axis, theta)
}

fn frobenius_distance(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (a[i][j] - b[i][j]).norm_sqr();
        }
    }
    s.sqrt()
}

/// The Clifford angle in `{0, π/2, π, 3π/2}` whose rotation is closest to
/// `R(θ)` in Frobenius norm. The comparison is phase-sensitive, so angles near
/// `2π` map to `3π/2` rather than `0`. Ties go to the smaller angle.
pub fn closest_clifford_angle(theta: f64) -> f64 {
    // the axis does not change the distance; X is used as a representative
    let target = rotation_2x2(Axis::X, theta);
    let mut best = CLIFFORD_ANGLES[0];
    let mut best_dist = f64::INFINITY;
    for &c in &CLIFFORD_ANGLES {
        let d = frobenius_distance(&target, &rotation_2x2(Axis::X, c));
        if d < best_dist - TIE_TOL {
            best = c;
            best_dist = d;
        }
    }
    best
}

pub fn is_clifford_angle(theta: f64) -> bool {
    CLIFFORD_ANGLES.iter().any(|&c| (theta - c).abs() < 1e-12)
}

/// Noise-canceling twin: every rotation snapped to its closest Clifford angle,
/// gate placement and count untouched.
pub fn to_noise_canceling(circuit: &Circuit) -> Circuit {
    let gates = circuit
        .gates()
        .iter()
        .map(|g| match *g {
            Gate::Rotation { axis, angle, qubit } => Gate::Rotation {
                axis,
                angle: closest_clifford_angle(angle),
                qubit,
            },
            cz => cz,
        })
        .collect();
    Circuit::from_gates(circuit.width(), format!("{}-ncc", circuit.label()), gates)
        .expect("snapping angles keeps a valid circuit valid")
}
