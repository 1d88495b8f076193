use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::Topology;
use crate::error::{Error, Result};
use crate::estimators::UrbanekFit;
use crate::nre::LambdaGrid;
use crate::sim::Amplification;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Nre,
    NreBaseline,
    Zne,
    Richardson,
    Urbanek,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Nre,
        Method::NreBaseline,
        Method::Zne,
        Method::Richardson,
        Method::Urbanek,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Nre => "nre",
            Method::NreBaseline => "nre-baseline",
            Method::Zne => "zne",
            Method::Richardson => "richardson",
            Method::Urbanek => "urbanek",
        }
    }

    /// Whether the method reads the noise-canceling circuit.
    pub fn uses_ncc(self) -> bool {
        matches!(self, Method::Nre | Method::NreBaseline | Method::Urbanek)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Either `{"lambda1": …, "h": …, "m": …}` or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Uniform { lambda1: f64, h: f64, m: usize },
    Explicit(Vec<f64>),
}

impl LambdaSpec {
    pub fn grid(&self) -> Result<LambdaGrid> {
        match self {
            LambdaSpec::Uniform { lambda1, h, m } => LambdaGrid::uniform(*lambda1, *h, *m),
            LambdaSpec::Explicit(v) => LambdaGrid::new(v.clone()),
        }
    }
}

/// QAOA angles used when a config does not supply its own: a linear ramp,
/// `γ_l = γ_max (l + ½)/p` and `β_l = β_max (1 − (l + ½)/p)`.
pub const DEFAULT_GAMMA_MAX: f64 = -0.1;
pub const DEFAULT_BETA_MAX: f64 = -0.85;

pub fn default_qaoa_angles(p: usize) -> (Vec<f64>, Vec<f64>) {
    let frac = |l: usize| (l as f64 + 0.5) / p as f64;
    (
        (0..p).map(|l| DEFAULT_GAMMA_MAX * frac(l)).collect(),
        (0..p).map(|l| DEFAULT_BETA_MAX * (1.0 - frac(l))).collect(),
    )
}

fn default_topology() -> String {
    "star-5".into()
}
fn default_g() -> f64 {
    2.0
}
fn default_p() -> usize {
    4
}
fn default_lambdas() -> LambdaSpec {
    LambdaSpec::Explicit(vec![1.0, 2.0, 3.0])
}
fn default_f() -> Vec<f64> {
    vec![0.001, 0.003, 0.01, 0.03, 0.05, 0.1]
}
fn default_shots() -> u64 {
    600_000
}
fn default_b() -> usize {
    200
}
fn default_r() -> usize {
    40_000
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_amplification() -> Amplification {
    Amplification::Folded
}
fn default_floor() -> f64 {
    1e-6
}
fn default_repetitions() -> usize {
    25
}

/// A complete experiment description. Every field has a default, so `{}` is
/// the desk-scale star-5 study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_topology")]
    pub topology: String,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default)]
    pub gammas: Option<Vec<f64>>,
    #[serde(default)]
    pub betas: Option<Vec<f64>>,
    #[serde(default = "default_lambdas")]
    pub lambdas: LambdaSpec,
    #[serde(default = "default_f")]
    pub f: Vec<f64>,
    /// Shots across all circuits, scale factors and measurement groups.
    #[serde(default = "default_shots")]
    pub shots_total: u64,
    #[serde(rename = "B", default = "default_b")]
    pub bootstraps: usize,
    #[serde(rename = "R", default = "default_r")]
    pub resamples: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_amplification")]
    pub amplification: Amplification,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_floor")]
    pub weight_floor: f64,
    /// Adds a constant offset to the ZNE exponential.
    #[serde(default)]
    pub zne_offset: bool,
    #[serde(default)]
    pub urbanek_fit: UrbanekFit,
    /// Independent runs per noise rate in the overhead sweep.
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(self).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn topology(&self) -> Result<Topology> {
        Topology::from_name(&self.topology)
    }

    pub fn grid(&self) -> Result<LambdaGrid> {
        self.lambdas.grid()
    }

    pub fn qaoa_angles(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match (&self.gammas, &self.betas) {
            (None, None) => Ok(default_qaoa_angles(self.p)),
            (Some(g), Some(b)) => Ok((g.clone(), b.clone())),
            _ => Err(Error::InvalidConfig("gammas and betas must be given together".into())),
        }
    }

    pub fn wants(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }

    pub fn validate(&self) -> Result<()> {
        self.topology()?;
        let grid = self.grid()?;
        let (gammas, betas) = self.qaoa_angles()?;
        if self.p == 0 || gammas.len() != self.p || betas.len() != self.p {
            return Err(Error::InvalidConfig(format!("need {} gammas and betas", self.p)));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods requested".into()));
        }
        if self.f.is_empty() {
            return Err(Error::InvalidConfig("no noise rates given".into()));
        }
        if self.bootstraps < 2 || self.resamples < 2 {
            return Err(Error::InvalidConfig("B and R must both be at least 2".into()));
        }
        if self.wants(Method::Nre) && grid.len() < 3 {
            return Err(Error::InvalidConfig("nre needs at least three scale factors".into()));
        }
        if self.zne_offset && self.wants(Method::Zne) && grid.len() < 3 {
            return Err(Error::InvalidConfig("offset ZNE needs at least three scale factors".into()));
        }
        if matches!(self.amplification, Amplification::Folded) && grid.first() < 1.0 {
            return Err(Error::InvalidConfig("folding cannot reduce noise below lambda = 1".into()));
        }
        for &f in &self.f {
            let scale = match self.amplification {
                Amplification::Folded => 1.0,
                _ => grid.last(),
            };
            if !(f >= 0.0) || f * scale >= 1.0 {
                return Err(Error::InvalidConfig(format!("noise rate {f} out of range for this grid")));
            }
        }
        let coordinates = 2 * grid.len() as u64 * 2;
        if self.shots_total < coordinates {
            return Err(Error::InvalidConfig(format!(
                "{} shots cannot cover {coordinates} (circuit, lambda, group) coordinates",
                self.shots_total
            )));
        }
        if self.shots_total / coordinates < self.bootstraps as u64 {
            return Err(Error::InvalidConfig(
                "shots per coordinate must be at least B".into(),
            ));
        }
        if !(self.weight_floor > 0.0) {
            return Err(Error::InvalidConfig("weight floor must be positive".into()));
        }
        Ok(())
    }
}
