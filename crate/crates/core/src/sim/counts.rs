use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::density::{rotated_probabilities, DensityMatrix};
use crate::circuit::MeasurementGroup;
use crate::error::{Error, Result};

/// Outcome histogram. Outcomes are basis indices (qubit `q` ↔ bit `q`); in text
/// form the `k`-th character of a bitstring is qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsTable {
    width: usize,
    shots: u64,
    counts: BTreeMap<u64, u64>,
}

impl CountsTable {
    pub fn new(width: usize, counts: BTreeMap<u64, u64>) -> Result<Self> {
        if width > 63 {
            return Err(Error::InvalidCounts(format!("width {width} too large")));
        }
        if let Some((&k, _)) = counts.iter().find(|(&k, _)| k >> width != 0) {
            return Err(Error::InvalidCounts(format!(
                "outcome {k} does not fit in {width} qubits"
            )));
        }
        let mut counts = counts;
        counts.retain(|_, c| *c > 0);
        let shots = counts.values().sum();
        Ok(Self { width, shots, counts })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn get(&self, outcome: u64) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    /// Adds another histogram of the same width.
    pub fn merged(&self, other: &CountsTable) -> Result<CountsTable> {
        if self.width != other.width {
            return Err(Error::InvalidCounts("width mismatch in merge".into()));
        }
        let mut counts = self.counts.clone();
        for (&k, &v) in &other.counts {
            *counts.entry(k).or_insert(0) += v;
        }
        CountsTable::new(self.width, counts)
    }

    pub fn bitstring(&self, outcome: u64) -> String {
        (0..self.width)
            .map(|q| if outcome >> q & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn parse_bitstring(s: &str) -> Option<u64> {
        s.chars().enumerate().try_fold(0u64, |acc, (q, ch)| match ch {
            '0' => Some(acc),
            '1' => Some(acc | (1 << q)),
            _ => None,
        })
    }
}

/// Draws `shots` samples from `probs` as a multinomial, via conditional binomials.
pub(crate) fn multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> BTreeMap<u64, u64> {
    let clean: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    // tail[i] = Σ_{j ≥ i} p_j
    let mut tail = vec![0.0; clean.len() + 1];
    for i in (0..clean.len()).rev() {
        tail[i] = tail[i + 1] + clean[i];
    }
    let mut out = BTreeMap::new();
    let mut remaining = shots;
    for (i, &p) in clean.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p == 0.0 {
            continue;
        }
        let k = if tail[i + 1] <= 0.0 {
            remaining
        } else {
            let q = (p / tail[i]).clamp(0.0, 1.0);
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        if k > 0 {
            out.insert(i as u64, k);
        }
        remaining -= k;
    }
    out
}

/// Samples `shots` measurement outcomes of `rho` in the group's rotated basis.
pub fn sample_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    group: &MeasurementGroup,
    shots: u64,
    rng: &mut R,
) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::InvalidCounts("need at least one shot".into()));
    }
    let probs = rotated_probabilities(rho, group);
    CountsTable::new(rho.n(), multinomial(&probs, shots, rng))
}

/// `Σ_terms coeff · (1/S) Σ_x count(x) · (−1)^{parity(x ∧ support)}`.
pub fn expectation_from_counts(counts: &CountsTable, group: &MeasurementGroup) -> Result<f64> {
    if counts.shots == 0 {
        return Err(Error::InvalidCounts("zero shots".into()));
    }
    if counts.width != group.width {
        return Err(Error::InvalidCounts(format!(
            "counts width {} vs group width {}",
            counts.width, group.width
        )));
    }
    let s = counts.shots as f64;
    Ok(group
        .terms
        .iter()
        .map(|t| {
            let mask = t.mask();
            let signed: i64 = counts
                .counts
                .iter()
                .map(|(&x, &c)| if (x & mask).count_ones() % 2 == 0 { c as i64 } else { -(c as i64) })
                .sum();
            t.coeff * signed as f64 / s
        })
        .sum())
}

/// A counts table tagged with the coordinates it was measured at. This is the
/// on-disk exchange format, also used to ingest externally produced counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsRecord {
    pub circuit: String,
    pub group: String,
    pub lambda: f64,
    pub table: CountsTable,
}

impl CountsRecord {
    /// `shots <S> qubits <n> circuit <label> group <id> lambda <value>` followed
    /// by `<bitstring> <count>` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "shots {} qubits {} circuit {} group {} lambda {}\n",
            self.table.shots, self.table.width, self.circuit, self.group, self.lambda
        );
        for (&x, &c) in &self.table.counts {
            let _ = writeln!(out, "{} {}", self.table.bitstring(x), c);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line, message: &str| Error::Parse {
            line,
            message: message.to_string(),
        };
        let (hl, header) = lines.next().ok_or_else(|| perr(0, "empty counts file"))?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        let (shots, width, circuit, group, lambda) = match tok.as_slice() {
            ["shots", s, "qubits", n, "circuit", c, "group", g, "lambda", l] => (
                s.parse::<u64>().map_err(|_| perr(hl, "bad shot count"))?,
                n.parse::<usize>().map_err(|_| perr(hl, "bad qubit count"))?,
                c.to_string(),
                g.to_string(),
                l.parse::<f64>().map_err(|_| perr(hl, "bad lambda"))?,
            ),
            _ => {
                return Err(perr(
                    hl,
                    "expected `shots <S> qubits <n> circuit <label> group <id> lambda <value>`",
                ))
            }
        };
        let mut counts = BTreeMap::new();
        for (ln, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let [bits, c] = tok.as_slice() else {
                return Err(perr(ln, "expected `<bitstring> <count>`"));
            };
            if bits.len() != width {
                return Err(perr(ln, "bitstring length does not match qubit count"));
            }
            let x = CountsTable::parse_bitstring(bits).ok_or_else(|| perr(ln, "bad bitstring"))?;
            let c: u64 = c.parse().map_err(|_| perr(ln, "bad count"))?;
            *counts.entry(x).or_insert(0) += c;
        }
        let table = CountsTable::new(width, counts).map_err(|e| perr(hl, &e.to_string()))?;
        if table.shots != shots {
            return Err(perr(
                hl,
                &format!("header declares {shots} shots but counts sum to {}", table.shots),
            ));
        }
        Ok(Self { circuit, group, lambda, table })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate, PauliTerm};
    use crate::rng::stream;
    use crate::sim::{exact_expectation, simulate_density, NoiseSpec};
    use proptest::prelude::*;

    fn single_z(width: usize, q: usize) -> MeasurementGroup {
        MeasurementGroup {
            id: "z".into(),
            width,
            rotation: vec![],
            terms: vec![PauliTerm { coeff: 1.0, support: vec![q] }],
        }
    }

    #[test]
    fn zero_state_samples_all_zeros() {
        let rho = DensityMatrix::zero_state(3);
        let counts = sample_counts(&rho, &single_z(3, 0), 1000, &mut stream(1, &[0])).unwrap();
        assert_eq!(counts.get(0), 1000);
        assert_eq!(counts.counts().len(), 1);
        assert_eq!(expectation_from_counts(&counts, &single_z(3, 0)).unwrap(), 1.0);
    }

    #[test]
    fn fifty_fifty_split_gives_zero() {
        let counts = CountsTable::new(2, BTreeMap::from([(0, 500), (1, 500)])).unwrap();
        assert_eq!(expectation_from_counts(&counts, &single_z(2, 0)).unwrap(), 0.0);
        assert_eq!(expectation_from_counts(&counts, &single_z(2, 1)).unwrap(), 1.0);
    }

    #[test]
    fn zero_shots_rejected() {
        let counts = CountsTable::new(1, BTreeMap::new()).unwrap();
        assert!(expectation_from_counts(&counts, &single_z(1, 0)).is_err());
        let rho = DensityMatrix::zero_state(1);
        assert!(sample_counts(&rho, &single_z(1, 0), 0, &mut stream(0, &[])).is_err());
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let c = Circuit::from_gates(2, "c", vec![Gate::ry(1.0, 0), Gate::cz(0, 1), Gate::rx(0.5, 1)])
            .unwrap();
        let rho = simulate_density(&c, &NoiseSpec::noiseless(), 1.0).unwrap();
        let g = single_z(2, 1);
        let a = sample_counts(&rho, &g, 5000, &mut stream(9, &[1, 2])).unwrap();
        let b = sample_counts(&rho, &g, 5000, &mut stream(9, &[1, 2])).unwrap();
        let c2 = sample_counts(&rho, &g, 5000, &mut stream(9, &[1, 3])).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c2);
    }

    #[test]
    fn large_sample_concentrates_within_four_over_sqrt_s() {
        let c = Circuit::from_gates(
            3,
            "c",
            vec![Gate::ry(1.0, 0), Gate::cz(0, 1), Gate::rx(0.5, 1), Gate::ry(2.0, 2), Gate::cz(1, 2)],
        )
        .unwrap();
        let rho = simulate_density(&c, &NoiseSpec::new(0.05, crate::sim::Amplification::RateScaled).unwrap(), 1.0)
            .unwrap();
        let group = MeasurementGroup {
            id: "mix".into(),
            width: 3,
            rotation: vec![Gate::ry(1.5 * std::f64::consts::PI, 0)],
            terms: vec![
                PauliTerm { coeff: 1.0, support: vec![0] },
                PauliTerm { coeff: 1.0, support: vec![1, 2] },
            ],
        };
        let shots = 1_000_000u64;
        let tol = 4.0 / (shots as f64).sqrt();
        let mut failures = 0;
        for seed in 0..20 {
            let counts = sample_counts(&rho, &group, shots, &mut stream(seed, &[7])).unwrap();
            assert_eq!(counts.shots(), shots);
            for t in &group.terms {
                let g1 = MeasurementGroup { terms: vec![t.clone()], ..group.clone() };
                let diff = expectation_from_counts(&counts, &g1).unwrap() - exact_expectation(&rho, &g1);
                if diff.abs() > tol {
                    failures += 1;
                }
            }
        }
        // 4σ bound on ±1 variables: failures are essentially impossible
        assert!(failures <= 1, "{failures} terms outside 4/sqrt(S)");
    }

    #[test]
    fn record_text_round_trip_and_errors() {
        let table = CountsTable::new(3, BTreeMap::from([(0b001, 7), (0b110, 3)])).unwrap();
        let rec = CountsRecord { circuit: "t".into(), group: "z".into(), lambda: 1.5, table };
        let text = rec.to_text();
        assert!(text.starts_with("shots 10 qubits 3 circuit t group z lambda 1.5\n"));
        assert!(text.contains("100 7\n"), "{text}");
        assert!(text.contains("011 3\n"), "{text}");
        assert_eq!(CountsRecord::from_text(&text).unwrap(), rec);

        let bad_sum = "shots 11 qubits 1 circuit t group z lambda 1\n0 10\n";
        assert!(CountsRecord::from_text(bad_sum).is_err());
        let bad_bits = "shots 1 qubits 2 circuit t group z lambda 1\n0 1\n";
        assert!(matches!(CountsRecord::from_text(bad_bits), Err(Error::Parse { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn counts_always_sum_to_shots(
            weights in proptest::collection::vec(0.0f64..1.0, 1..16),
            shots in 1u64..100_000,
            seed in any::<u64>(),
        ) {
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 0.0);
            let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let counts = multinomial(&probs, shots, &mut stream(seed, &[]));
            prop_assert_eq!(counts.values().sum::<u64>(), shots);
            for (&k, _) in &counts {
                prop_assert!(probs[k as usize] > 0.0);
            }
        }
    }
}
