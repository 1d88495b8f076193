use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::STAGE_BOOTSTRAP;
use crate::circuit::MeasurementGroup;
use crate::error::{Error, Result};
use crate::nre::LambdaGrid;
use crate::rng::stream;
use crate::sim::counts::multinomial;
use crate::sim::{expectation_from_counts, CountsTable};
use crate::stats::sample_std;

/// Resamples `S` shots with replacement from the empirical distribution, `b` times.
pub fn bootstrap_counts<R: Rng + ?Sized>(counts: &CountsTable, b: usize, rng: &mut R) -> Vec<CountsTable> {
    let outcomes: Vec<u64> = counts.counts().keys().copied().collect();
    let s = counts.shots();
    let probs: Vec<f64> = counts.counts().values().map(|c| *c as f64 / s as f64).collect();
    (0..b)
        .map(|_| {
            let drawn = multinomial(&probs, s, rng)
                .into_iter()
                .map(|(i, c)| (outcomes[i as usize], c))
                .collect();
            CountsTable::new(counts.width(), drawn).expect("resample keeps the width")
        })
        .collect()
}

/// Group expectation of each of `b` bootstrap replicates, without materializing
/// the replicate tables.
pub fn bootstrap_expectations<R: Rng + ?Sized>(
    counts: &CountsTable,
    group: &MeasurementGroup,
    b: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    // validates width and shots
    expectation_from_counts(counts, group)?;
    let s = counts.shots();
    let mut probs = Vec::with_capacity(counts.counts().len());
    let mut values = Vec::with_capacity(counts.counts().len());
    for (&x, &c) in counts.counts() {
        probs.push(c as f64 / s as f64);
        values.push(
            group
                .terms
                .iter()
                .map(|t| if (x & t.mask()).count_ones() % 2 == 0 { t.coeff } else { -t.coeff })
                .sum::<f64>(),
        );
    }
    Ok((0..b)
        .map(|_| {
            multinomial(&probs, s, rng)
                .into_iter()
                .map(|(i, c)| values[i as usize] * c as f64)
                .sum::<f64>()
                / s as f64
        })
        .collect())
}

/// `r` draws from `Normal(mean, std)`; `std = 0` returns `r` copies of `mean`.
pub fn gaussian_resample<R: Rng + ?Sized>(mean: f64, std: f64, r: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(Error::InvalidConfig(format!("standard deviation must be finite and >= 0, got {std}")));
    }
    if std == 0.0 {
        return Ok(vec![mean; r]);
    }
    let normal = Normal::new(mean, std).expect("validated parameters");
    Ok(normal.sample_iter(rng).take(r).collect())
}

/// Counts for the target and noise-canceling circuits, indexed `[λ][group]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableCounts {
    pub grid: LambdaGrid,
    pub groups: Vec<MeasurementGroup>,
    pub target: Vec<Vec<CountsTable>>,
    pub ncc: Vec<Vec<CountsTable>>,
}

impl ObservableCounts {
    pub fn validate(&self) -> Result<()> {
        let m = self.grid.len();
        for (name, tables) in [("target", &self.target), ("ncc", &self.ncc)] {
            if tables.len() != m {
                return Err(Error::LengthMismatch(format!(
                    "{name}: {} scale factors of counts for a grid of {m}",
                    tables.len()
                )));
            }
            if tables.iter().any(|row| row.len() != self.groups.len()) {
                return Err(Error::LengthMismatch(format!(
                    "{name}: every scale factor needs one table per measurement group"
                )));
            }
        }
        Ok(())
    }

    /// Observable value per scale factor straight from the counts.
    pub fn point_estimates(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let sum = |tables: &Vec<Vec<CountsTable>>| -> Result<Vec<f64>> {
            tables
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&self.groups)
                        .map(|(c, g)| expectation_from_counts(c, g))
                        .sum::<Result<f64>>()
                })
                .collect()
        };
        Ok((sum(&self.target)?, sum(&self.ncc)?))
    }
}

/// Bootstrapped observable values, summed over measurement groups, for each
/// circuit and scale factor. `target[i][s]` is replicate `s` at `λ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSet {
    pub b: usize,
    pub target: Vec<Vec<f64>>,
    pub ncc: Vec<Vec<f64>>,
    pub target_std: Vec<f64>,
    pub ncc_std: Vec<f64>,
}

impl BootstrapSet {
    pub fn new(target: Vec<Vec<f64>>, ncc: Vec<Vec<f64>>) -> Result<Self> {
        if target.len() != ncc.len() || target.is_empty() {
            return Err(Error::LengthMismatch("target and ncc need the same nonempty grid".into()));
        }
        let b = target[0].len();
        if b < 2 || target.iter().chain(&ncc).any(|v| v.len() != b) {
            return Err(Error::InvalidConfig("every coordinate needs the same B >= 2 samples".into()));
        }
        let target_std = target.iter().map(|v| sample_std(v)).collect();
        let ncc_std = ncc.iter().map(|v| sample_std(v)).collect();
        Ok(Self {
            b,
            target,
            ncc,
            target_std,
            ncc_std,
        })
    }

    /// `b` identical replicates of exact values: zero spread everywhere.
    pub fn exact(target: &[f64], ncc: &[f64], b: usize) -> Result<Self> {
        Self::new(
            target.iter().map(|v| vec![*v; b]).collect(),
            ncc.iter().map(|v| vec![*v; b]).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn target_at(&self, s: usize) -> Vec<f64> {
        self.target.iter().map(|v| v[s]).collect()
    }

    pub fn ncc_at(&self, s: usize) -> Vec<f64> {
        self.ncc.iter().map(|v| v[s]).collect()
    }
}

/// Bootstraps each `[λ][group]` table independently and sums the group
/// expectations per replicate. `role` separates the random streams of
/// different circuits sharing one seed.
pub fn bootstrap_series(
    tables: &[Vec<CountsTable>],
    groups: &[MeasurementGroup],
    b: usize,
    seed: u64,
    role: u64,
) -> Result<Vec<Vec<f64>>> {
    tables
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != groups.len() {
                return Err(Error::LengthMismatch("one table per measurement group".into()));
            }
            let mut total = vec![0.0; b];
            for (k, (table, group)) in row.iter().zip(groups).enumerate() {
                let mut rng = stream(seed, &[STAGE_BOOTSTRAP, role, i as u64, k as u64]);
                for (t, v) in total.iter_mut().zip(bootstrap_expectations(table, group, b, &mut rng)?) {
                    *t += v;
                }
            }
            Ok(total)
        })
        .collect()
}

/// Bootstraps target (role 0) and ncc (role 1) counts.
pub fn bootstrap_observables(counts: &ObservableCounts, b: usize, seed: u64) -> Result<BootstrapSet> {
    counts.validate()?;
    BootstrapSet::new(
        bootstrap_series(&counts.target, &counts.groups, b, seed, 0)?,
        bootstrap_series(&counts.ncc, &counts.groups, b, seed, 1)?,
    )
}
