//! Acceptance suite. Each test checks one end-to-end requirement and prints a
//! single `PASS`/`FAIL` line with the measured numbers; run with
//! `cargo test --test acceptance -- --nocapture --test-threads 1` to read them.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nrelab::circuit::{fold_global, Axis, Circuit, Gate, MeasurementGroup, PauliTerm};
use nrelab::estimators::{linear_fit, Weighting};
use nrelab::harness::{fit_overhead, sweep_overhead, Experiment, ExperimentConfig, Method, NoiseLevelOutcome};
use nrelab::nre::{
    baseline_estimate, fd_coefficients_from_points, fd_coefficients_nonuniform, fd_coefficients_uniform,
    optimal_control, taylor_weights, AuxSeries,
};
use nrelab::resampling::{run_nre_on_bootstrap, BootstrapSet, PipelineConfig};
use nrelab::rng::derive_key;
use nrelab::sim::{
    circuit_unitary, clifford_pauli_oracle, exact_expectation, operator_distance, simulate_density, Amplification,
    NoiseSpec,
};
use nrelab::stats::{median, spearman};

fn report(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name} failed: {detail}");
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn coefficient_fixtures() {
    let mut worst = 0.0f64;
    worst = worst.max(max_dev(&fd_coefficients_uniform(2, 1.0).unwrap().rows[0], &[-1.0, 1.0]));
    let a3 = fd_coefficients_uniform(3, 1.0).unwrap();
    worst = worst.max(max_dev(&a3.rows[0], &[-1.5, 2.0, -0.5]));
    worst = worst.max(max_dev(&a3.rows[1], &[1.0, -2.0, 1.0]));
    worst = worst.max(max_dev(&taylor_weights(2, 1.0, 1.0).unwrap(), &[1.0, -1.0]));
    worst = worst.max(max_dev(&taylor_weights(3, 1.0, 1.0).unwrap(), &[2.0, -3.0, 1.0]));
    report("finite-difference and Taylor-weight fixtures", worst <= 1e-12, format!("max deviation {worst:.2e}"));
}

#[test]
fn nonuniform_reduction() {
    let mut uniform_dev = 0.0f64;
    for h in [0.25, 0.5, 1.0, 2.0, 3.0] {
        let u = fd_coefficients_uniform(3, h).unwrap();
        let nu = fd_coefficients_nonuniform(&[h, h]).unwrap();
        for (a, b) in u.rows.iter().zip(&nu.rows) {
            uniform_dev = uniform_dev.max(max_dev(a, b));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut closed_dev = 0.0f64;
    for _ in 0..1000 {
        let t1 = rng.random_range(0.05..4.0);
        let t2 = rng.random_range(0.05..4.0);
        let closed = fd_coefficients_nonuniform(&[t1, t2]).unwrap();
        let solved = fd_coefficients_from_points(&[0.0, t1, t1 + t2]).unwrap();
        for (a, b) in closed.rows.iter().zip(&solved.rows) {
            let scale = a.iter().map(|x| x.abs()).fold(1.0, f64::max);
            closed_dev = closed_dev.max(max_dev(a, b) / scale);
        }
    }
    report(
        "non-uniform coefficients",
        uniform_dev <= 1e-12 && closed_dev <= 1e-10,
        format!("(h,h) vs uniform {uniform_dev:.2e}; closed form vs moment solve over 1000 draws {closed_dev:.2e}"),
    );
}

#[test]
fn two_point_baseline_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 1000 {
        let target = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let ncc: [f64; 2] = [rng.random_range(0.05..1.0), rng.random_range(0.05..1.0)];
        if (ncc[0] - ncc[1]).abs() < 1e-3 {
            continue;
        }
        let h = rng.random_range(0.2..3.0);
        let l1 = rng.random_range(0.5..3.0);
        let aux = AuxSeries::from_values(&target, &ncc, rng.random_range(0.1..1.0)).unwrap();
        let c = optimal_control(&aux, &taylor_weights(2, h, l1).unwrap()).unwrap();
        let a = aux.aux(c.n_op);
        worst = worst.max((a[0] - a[1]).abs() / (1.0 + a[0].abs()));
        checked += 1;
    }
    report("two-point auxiliary flattening", worst <= 1e-10, format!("max |A1 - A2| over 1000 series {worst:.2e}"));
}

#[test]
fn noiseless_identity() {
    let cfg = ExperimentConfig::from_json(r#"{"f": [0.0], "B": 50, "R": 1000}"#).unwrap();
    let exp = Experiment::new(cfg).unwrap();
    let point = exp.prepare(0.0).unwrap();
    let aux = AuxSeries::from_values(&point.exact_target, &point.exact_ncc, exp.ncc_noiseless).unwrap();
    let v = taylor_weights(3, 1.0, 1.0).unwrap();
    let control = optimal_control(&aux, &v).unwrap();
    let baseline = baseline_estimate(&aux, &point.exact_target, control).unwrap();
    let set = BootstrapSet::exact(&point.exact_target, &point.exact_ncc, 50).unwrap();
    let pcfg = PipelineConfig {
        bootstraps: 50,
        resamples: 1000,
        ..PipelineConfig::default()
    };
    let out = run_nre_on_bootstrap(&set, &exp.grid, exp.ncc_noiseless, &pcfg).unwrap();
    let worst = out
        .final_estimates
        .samples
        .iter()
        .map(|x| (x - exp.target_noiseless).abs())
        .fold((baseline.estimate - exp.target_noiseless).abs(), f64::max);
    report(
        "noiseless pipeline identity",
        control.degenerate && control.n_op == 0.0 && worst <= 1e-9,
        format!("degenerate control {}, max |estimate - truth| {worst:.2e}", control.degenerate),
    );
}

fn random_clifford_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Circuit {
    let mut c = Circuit::new(n, "random-clifford");
    for _ in 0..len {
        if n > 1 && rng.random_bool(0.4) {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            c.push(Gate::cz(a, b)).unwrap();
        } else {
            let axis = [Axis::X, Axis::Y, Axis::Z][rng.random_range(0..3)];
            let angle = FRAC_PI_2 * rng.random_range(0..4) as f64;
            c.push(Gate::rotation(axis, angle, rng.random_range(0..n))).unwrap();
        }
    }
    c
}

/// A random Pauli string measured as a Z-string after per-qubit basis changes.
fn random_pauli_group(rng: &mut ChaCha8Rng, n: usize) -> MeasurementGroup {
    let mut rotation = Vec::new();
    let mut support = Vec::new();
    for q in 0..n {
        match rng.random_range(0..4) {
            0 => {}
            1 => {
                rotation.push(Gate::ry(3.0 * FRAC_PI_2, q));
                support.push(q);
            }
            2 => {
                rotation.push(Gate::rx(FRAC_PI_2, q));
                support.push(q);
            }
            _ => support.push(q),
        }
    }
    MeasurementGroup {
        id: "p".into(),
        width: n,
        rotation,
        terms: vec![PauliTerm { coeff: 1.0, support }],
    }
}

#[test]
fn simulator_matches_pauli_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=6);
        let len = rng.random_range(1..40);
        let circuit = random_clifford_circuit(&mut rng, n, len);
        let group = random_pauli_group(&mut rng, n);
        let f = rng.random_range(0.0..0.08);
        let lambda = rng.random_range(1.0..3.0);
        let noise = NoiseSpec::new(f, Amplification::RateScaled).unwrap();
        let dense = exact_expectation(&simulate_density(&circuit, &noise, lambda).unwrap(), &group);
        let oracle = clifford_pauli_oracle(&circuit, &group, f, lambda).unwrap();
        worst = worst.max((dense - oracle).abs());
    }
    report("density simulation vs Pauli propagation", worst <= 1e-10, format!("max difference over 200 circuits {worst:.2e}"));
}

fn random_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Circuit {
    let mut c = Circuit::new(n, "random");
    for _ in 0..len {
        if n > 1 && rng.random_bool(0.3) {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            c.push(Gate::cz(a, b)).unwrap();
        } else {
            let axis = [Axis::X, Axis::Y, Axis::Z][rng.random_range(0..3)];
            c.push(Gate::rotation(axis, rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0..n)))
                .unwrap();
        }
    }
    c
}

#[test]
fn folding_preserves_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let n = rng.random_range(1..=4);
        let len = rng.random_range(1..30);
        let c = random_circuit(&mut rng, n, len);
        let u = circuit_unitary(&c);
        for scale in [1.0, 1.5, 2.0, 3.0] {
            let folded = fold_global(&c, scale).unwrap();
            worst = worst.max(operator_distance(&u, &circuit_unitary(&folded)));
        }
    }
    report("global folding is unitary-equivalent", worst <= 1e-9, format!("max operator distance {worst:.2e}"));
}

const STUDY_RATES: [f64; 3] = [0.03, 0.05, 0.1];
const STUDY_SEEDS: u64 = 10;
/// Pooled (D, |baseline error|) pairs kept for the correlation check.
const POOLED_KEEP: usize = 100_000;

struct Study {
    truth: f64,
    /// `cells[f_index][seed]`
    cells: Vec<Vec<NoiseLevelOutcome>>,
    /// Thinned pooled samples of the first seed at f = 0.05.
    pooled: Vec<(f64, f64)>,
}

/// Star-5 TFIM, g = 2, p = 4, λ = [1, 2, 3], 6×10⁵ shots, default B and R.
fn study() -> &'static Study {
    static STUDY: OnceLock<Study> = OnceLock::new();
    STUDY.get_or_init(|| {
        let cfg = ExperimentConfig::from_json(r#"{"f": [0.03, 0.05, 0.1], "seed": 2024}"#).unwrap();
        let exp = Experiment::new(cfg.clone()).unwrap();
        let mut pooled = Vec::new();
        let cells = STUDY_RATES
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let point = exp.prepare(f).unwrap();
                (0..STUDY_SEEDS)
                    .map(|s| {
                        let keep = f == 0.05 && s == 0;
                        let seed = derive_key(cfg.seed, &[i as u64, s]);
                        let out = exp.run_point(&point, seed, keep).unwrap();
                        if keep {
                            let all = out.nre.as_ref().unwrap().pooled.as_ref().unwrap();
                            let stride = (all.len() / POOLED_KEEP).max(1);
                            pooled = all
                                .iter()
                                .step_by(stride)
                                .map(|p| (p.dispersion, (p.baseline - exp.target_noiseless).abs()))
                                .collect();
                        }
                        let mut out = out;
                        out.nre = None;
                        out
                    })
                    .collect()
            })
            .collect();
        Study {
            truth: exp.target_noiseless,
            cells,
            pooled,
        }
    })
}

fn bias_of(cell: &NoiseLevelOutcome, m: Method) -> f64 {
    cell.summary(m).map_or(f64::INFINITY, |s| s.relative_bias)
}

fn std_of(cell: &NoiseLevelOutcome, m: Method) -> f64 {
    cell.summary(m).map_or(f64::INFINITY, |s| s.std)
}

#[test]
fn desk_scale_study_nre_beats_zne() {
    let s = study();
    let mut pass = true;
    let mut lines = Vec::new();
    for (i, &f) in STUDY_RATES.iter().enumerate() {
        let nre: Vec<f64> = s.cells[i].iter().map(|c| bias_of(c, Method::Nre)).collect();
        let zne: Vec<f64> = s.cells[i].iter().map(|c| bias_of(c, Method::Zne)).collect();
        let urb: Vec<f64> = s.cells[i].iter().map(|c| bias_of(c, Method::Urbanek)).collect();
        let (mn, mz) = (median(&nre), median(&zne));
        pass &= mn < mz;
        if f <= 0.05 {
            pass &= mn < 0.10;
        }
        lines.push(format!("f={f}: median R_nre {mn:.4}, R_zne {mz:.4}, R_urbanek {:.4}", median(&urb)));
    }
    report("NRE vs ZNE on the star-5 study", pass, format!("truth {:.6}; {}", s.truth, lines.join("; ")));
}

#[test]
fn bias_dispersion_correlation() {
    let s = study();
    let (d, e): (Vec<f64>, Vec<f64>) = s.pooled.iter().copied().unzip();
    let c = spearman(&d, &e);
    report(
        "bias-dispersion rank correlation at f = 0.05",
        c.n >= 10_000 && c.rho > 0.0 && c.p_positive < 0.01,
        format!("n {}, Spearman rho {:.4}, one-sided p {:.2e}", c.n, c.rho, c.p_positive),
    );
}

#[test]
fn second_layer_improves_baseline() {
    let s = study();
    let all = || s.cells.iter().flatten();
    let std_final = median(&all().map(|c| std_of(c, Method::Nre)).collect::<Vec<_>>());
    let std_base = median(&all().map(|c| std_of(c, Method::NreBaseline)).collect::<Vec<_>>());
    let r_final = median(&all().map(|c| bias_of(c, Method::Nre)).collect::<Vec<_>>());
    let r_base = median(&all().map(|c| bias_of(c, Method::NreBaseline)).collect::<Vec<_>>());
    let var_ratio: Vec<f64> = all()
        .map(|c| (std_of(c, Method::NreBaseline) / std_of(c, Method::Nre)).powi(2))
        .collect();
    report(
        "dispersion regression improves the baseline",
        std_final <= std_base && r_final <= r_base,
        format!(
            "median std final {std_final:.4} vs baseline {std_base:.4}; median R final {r_final:.4} vs baseline {r_base:.4}; \
             median baseline/final variance ratio {:.2} (measured, not asserted)",
            median(&var_ratio)
        ),
    );
}

#[test]
fn overhead_fit_sanity() {
    let n_tqg = 32.0;
    let rates = [0.001, 0.003, 0.01, 0.03, 0.05, 0.1];
    let x: Vec<f64> = rates.iter().map(|f| n_tqg * f).collect();
    // synthetic overheads with ±3% multiplicative jitter
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let c: Vec<f64> = x.iter().map(|v: &f64| (4.0 * v).exp() * rng.random_range(0.97..1.03)).collect();
    let (alpha, beta) = fit_overhead(&x, &c).unwrap();
    let two_sig = |v: f64, want: f64| (v - want).abs() <= 0.05 * want;
    let synthetic_ok = two_sig(alpha, 1.0) && two_sig(beta, 4.0);

    let cfg = ExperimentConfig::from_json(r#"{"B": 100, "R": 4000, "methods": ["nre", "nre-baseline", "zne", "urbanek"], "seed": 7}"#)
        .unwrap();
    let table = sweep_overhead(&cfg, 10).unwrap();
    let beta_of = |m: Method| table.fit(m).map_or(f64::NAN, |f| f.beta);
    let simulated_ok = [Method::Nre, Method::Zne, Method::Urbanek].iter().all(|&m| beta_of(m) > 0.0);

    let ratio = |num: Method, den: Method| -> f64 {
        let r: Vec<f64> = rates
            .iter()
            .filter_map(|&f| {
                let get = |m: Method| table.rows.iter().find(|r| r.f == f && r.method == m).and_then(|r| r.c_em);
                Some(get(num)? / get(den)?)
            })
            .collect();
        r.iter().sum::<f64>() / r.len() as f64
    };
    // keep the estimator fit itself honest: log-linear in N·f for the synthetic set
    let lin = linear_fit(&x, &c.iter().map(|v| v.ln()).collect::<Vec<_>>(), &[1.0; 6], Weighting::Uniform).unwrap();
    report(
        "sampling-overhead fit",
        synthetic_ok && simulated_ok && lin.residual_norm < 0.1,
        format!(
            "synthetic alpha {alpha:.3}, beta {beta:.3}; simulated beta nre {:.3}, zne {:.3}, urbanek {:.3}, nre-baseline {:.3}; \
             mean C_EM ratios baseline/nre {:.2}, nre/zne {:.2} (measured, not asserted)",
            beta_of(Method::Nre),
            beta_of(Method::Zne),
            beta_of(Method::Urbanek),
            beta_of(Method::NreBaseline),
            ratio(Method::NreBaseline, Method::Nre),
            ratio(Method::Nre, Method::Zne),
        ),
    );
}
