use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::ensembles::DistributionSpec;
use crate::stats::EdgeNormalization;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Figure1,
    Fourmoment,
    Gaps,
    Deloc,
    Concentration,
    MpConvergence,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Figure1 => "figure1",
            ExperimentKind::Fourmoment => "fourmoment",
            ExperimentKind::Gaps => "gaps",
            ExperimentKind::Deloc => "deloc",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::MpConvergence => "mp_convergence",
        }
    }
}

/// What the gap statistics are measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapScale {
    /// `n (λ_{i+1} − λ_i)`.
    #[default]
    Eigenvalue,
    /// `√(p+n) (σ_{i+1} − σ_i)`.
    SingularValue,
}

fn default_bins() -> usize {
    40
}
fn default_indices() -> Vec<usize> {
    vec![1]
}
fn default_interval_len() -> f64 {
    0.2
}
fn default_gap_exponents() -> Vec<f64> {
    vec![1.0]
}
fn default_deloc_factor() -> f64 {
    10.0
}
fn default_concentration_threshold() -> f64 {
    0.5
}

/// Statistic parameters; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Histogram bins for figure 1.
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub edge_normalization: EdgeNormalization,
    /// 1-based eigenvalue indices fed to the four-moment test function.
    #[serde(default = "default_indices")]
    pub indices: Vec<usize>,
    /// Width `s` of the Gaussian bumps on the `nλ` scale; `None` takes `n`
    /// times the local spacing of MP quantiles.
    #[serde(default)]
    pub g_scale: Option<f64>,
    #[serde(default = "default_interval_len")]
    pub interval_len: f64,
    #[serde(default)]
    pub gap_scale: GapScale,
    /// Exponents `c` of the gap thresholds `n^{-c}` on the normalized gaps.
    #[serde(default = "default_gap_exponents")]
    pub gap_exponents: Vec<f64>,
    /// Delocalization threshold is this factor times `ln n`.
    #[serde(default = "default_deloc_factor")]
    pub deloc_factor: f64,
    /// Concentration threshold on the interval deviation.
    #[serde(default = "default_concentration_threshold")]
    pub concentration_threshold: f64,
    /// Keep the eigenvalue list in every record.
    #[serde(default)]
    pub full: bool,
}

impl Default for Params {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub kind: ExperimentKind,
    pub ensembles: Vec<String>,
    pub p: usize,
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub params: Params,
    /// Execution detail only: excluded from the hash and the summary.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

/// The hashed part of a config.
#[derive(Serialize)]
struct Hashed<'a> {
    schema: u32,
    kind: ExperimentKind,
    ensembles: &'a [String],
    p: usize,
    n: usize,
    trials: u64,
    master_seed: u64,
    params: &'a Params,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, ensembles: &[&str], p: usize, n: usize, trials: u64, master_seed: u64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            kind,
            ensembles: ensembles.iter().map(|s| s.to_string()).collect(),
            p,
            n,
            trials,
            master_seed,
            params: Params::default(),
            workers: 1,
        }
    }

    /// Figure 1 at its canonical size: 600 × 800, 1000 trials per law.
    pub fn canonical_figure1() -> Self {
        Self::new(ExperimentKind::Figure1, &["gaussian_real", "rademacher"], 600, 800, 1000, 0)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let c: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("schema {} is not supported (expected {SCHEMA_VERSION})", self.schema));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.p == 0 || self.p > self.n {
            return bad(format!("need 1 <= p <= n, got p = {}, n = {}", self.p, self.n));
        }
        if self.ensembles.is_empty() {
            return bad("no ensembles named".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.ensembles {
            if !seen.insert(e.as_str()) {
                return bad(format!("ensemble {e} listed twice"));
            }
        }
        self.specs()?;
        match self.kind {
            ExperimentKind::Figure1 => {
                if self.ensembles.len() != 2 {
                    return bad("figure1 compares exactly two ensembles".into());
                }
                if self.p == self.n {
                    return bad("figure1 needs p < n for the soft-edge normalization".into());
                }
                if self.params.bins == 0 {
                    return bad("bins must be at least 1".into());
                }
            }
            ExperimentKind::Fourmoment => {
                let ix = &self.params.indices;
                if ix.is_empty() || ix[0] == 0 || *ix.last().unwrap() > self.p || ix.windows(2).any(|w| w[0] >= w[1]) {
                    return bad(format!("indices must satisfy 1 <= i_1 < ... < i_k <= p, got {ix:?}"));
                }
                if matches!(self.params.g_scale, Some(s) if !(s > 0.0)) {
                    return bad("g_scale must be positive".into());
                }
            }
            ExperimentKind::Gaps if self.p < 2 => return bad("gap statistics need p >= 2".into()),
            ExperimentKind::Concentration if !(self.params.interval_len > 0.0) => {
                return bad("interval_len must be positive".into())
            }
            _ => {}
        }
        Ok(())
    }

    pub fn specs(&self) -> Result<Vec<DistributionSpec>, HarnessError> {
        self.ensembles
            .iter()
            .map(|e| DistributionSpec::from_name(e).map_err(|err| HarnessError::Config(format!("ensemble {e}: {err}"))))
            .collect()
    }

    /// Canonical JSON of everything that determines the results.
    pub fn hashed_json(&self) -> String {
        serde_json::to_string(&Hashed {
            schema: self.schema,
            kind: self.kind,
            ensembles: &self.ensembles,
            p: self.p,
            n: self.n,
            trials: self.trials,
            master_seed: self.master_seed,
            params: &self.params,
        })
        .expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of [`Self::hashed_json`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.hashed_json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Seed of an ensemble's streams: the master seed mixed with the law's
/// canonical name, so aliases share streams and different laws do not.
pub fn ensemble_seed(master_seed: u64, spec: &DistributionSpec) -> u64 {
    let digest = Sha256::digest(spec.name().as_bytes());
    let tag = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    crate::ensembles::mix64(master_seed ^ tag)
}
