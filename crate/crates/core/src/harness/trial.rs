use serde::{Deserialize, Serialize};

use super::config::{ensemble_seed, ExperimentConfig, ExperimentKind, GapScale};
use super::HarnessError;
use crate::ensembles::{sample_matrix, DistributionSpec};
use crate::mp_law::MpModel;
use crate::spectra::{covariance_spectrum, decompose};
use crate::stats::{concentration_report, gap_stats, gap_stats_scaled, mp_sup_distance, tw_normalize_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    Failed,
}

/// Per-trial statistics; only those of the experiment's kind are present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialStats {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_min_sq: Option<f64>,
    /// Soft-edge normalized `σ_1²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_value: Option<f64>,
    /// Four-moment test function `G(nλ_{i_1}, …, nλ_{i_k})`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_normalized_gap: Option<f64>,
    /// 1-based `i` of the smallest gap `λ_{i+1} − λ_i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_argmin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delocalization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_counts: Option<Vec<usize>>,
    /// `sup_x |F^W(x) − F_MP(x)|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

impl TrialStats {
    /// The statistic summarized for this kind of experiment.
    pub fn primary(&self, kind: ExperimentKind) -> Option<f64> {
        match kind {
            ExperimentKind::Figure1 => self.edge_value,
            ExperimentKind::Fourmoment => self.g_value,
            ExperimentKind::Gaps => self.min_normalized_gap,
            ExperimentKind::Deloc => self.delocalization,
            ExperimentKind::Concentration => self.max_deviation,
            ExperimentKind::MpConvergence => self.sup_distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub config_hash: String,
    pub trial_index: u64,
    pub ensemble: String,
    /// Stream seed of the ensemble; entry `(i, j)` of this trial is drawn
    /// from the stream keyed by `(seed, trial_index, i, j)`.
    pub seed: u64,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub stats: TrialStats,
    /// Seconds; excluded from every comparison.
    pub wall_time: f64,
}

impl RunRecord {
    pub fn key(&self) -> (u64, &str) {
        (self.trial_index, &self.ensemble)
    }

    /// Equality ignoring `wall_time`.
    pub fn same_body(&self, other: &Self) -> bool {
        let mut a = self.clone();
        a.wall_time = other.wall_time;
        a == *other
    }
}

/// Everything shared by the trials of one config.
pub(crate) struct Context {
    pub config: ExperimentConfig,
    pub hash: String,
    pub specs: Vec<DistributionSpec>,
    pub seeds: Vec<u64>,
    pub model: MpModel<f64>,
    /// `(nμ_j, s_j)` per four-moment index.
    pub bumps: Vec<(f64, f64)>,
}

impl Context {
    pub fn new(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let specs = config.specs()?;
        let seeds = specs.iter().map(|s| ensemble_seed(config.master_seed, s)).collect();
        let model = MpModel::for_shape(config.p, config.n).map_err(|e| HarnessError::Config(e.to_string()))?;
        let bumps = if config.kind == ExperimentKind::Fourmoment { bumps(config, &model)? } else { Vec::new() };
        Ok(Self { config: config.clone(), hash: config.hash(), specs, seeds, model, bumps })
    }

    pub fn trial(&self, ensemble: usize, trial: u64) -> RunRecord {
        let start = std::time::Instant::now();
        let result = self.compute(ensemble, trial);
        let wall_time = start.elapsed().as_secs_f64();
        let (status, error, stats) = match result {
            Ok(s) => (TrialStatus::Ok, None, s),
            Err(e) => (TrialStatus::Failed, Some(e), TrialStats::default()),
        };
        RunRecord {
            config_hash: self.hash.clone(),
            trial_index: trial,
            ensemble: self.config.ensembles[ensemble].clone(),
            seed: self.seeds[ensemble],
            status,
            error,
            stats,
            wall_time,
        }
    }

    fn compute(&self, ensemble: usize, trial: u64) -> Result<TrialStats, String> {
        let c = &self.config;
        let (p, n) = (c.p, c.n);
        let sample = sample_matrix(&self.specs[ensemble], p, n, self.seeds[ensemble], trial).map_err(|e| e.to_string())?;
        let mut s = TrialStats::default();
        let lambdas = match c.kind {
            ExperimentKind::Deloc => {
                let d = decompose(&sample).map_err(|e| e.to_string())?;
                s.delocalization = Some((n as f64).sqrt() * d.max_coefficient());
                d.lambda().to_vec()
            }
            _ => covariance_spectrum(&sample).map_err(|e| e.to_string())?,
        };
        let nf = n as f64;
        match c.kind {
            ExperimentKind::Figure1 => {
                let s2 = nf * lambdas[0];
                s.sigma_min_sq = Some(s2);
                s.edge_value = Some(tw_normalize_with(s2, p, n, c.params.edge_normalization).map_err(|e| e.to_string())?);
            }
            ExperimentKind::Fourmoment => {
                let g = c
                    .params
                    .indices
                    .iter()
                    .zip(&self.bumps)
                    .map(|(&i, &(mu, w))| {
                        let d = nf * lambdas[i - 1] - mu;
                        (-d * d / (2.0 * w * w)).exp()
                    })
                    .product();
                s.g_value = Some(g);
            }
            ExperimentKind::Gaps => {
                let g = match c.params.gap_scale {
                    GapScale::Eigenvalue => gap_stats(&lambdas, n),
                    GapScale::SingularValue => {
                        let sig: Vec<f64> = lambdas.iter().map(|l| (nf * l).sqrt()).collect();
                        gap_stats_scaled(&sig, ((p + n) as f64).sqrt())
                    }
                }
                .map_err(|e| e.to_string())?;
                s.min_gap = Some(g.min_gap);
                s.min_normalized_gap = Some(g.min_normalized_gap);
                s.gap_argmin = Some(g.argmin);
            }
            ExperimentKind::Deloc => {}
            ExperimentKind::Concentration => {
                let r = concentration_report(&lambdas, &self.model, c.params.interval_len).map_err(|e| e.to_string())?;
                s.max_deviation = Some(r.iter().map(|x| x.deviation).fold(0.0, f64::max));
                s.interval_counts = Some(r.iter().map(|x| x.count).collect());
            }
            ExperimentKind::MpConvergence => {
                s.sup_distance = Some(mp_sup_distance(&lambdas, &self.model).map_err(|e| e.to_string())?);
            }
        }
        if c.params.full {
            s.lambdas = Some(lambdas);
        }
        Ok(s)
    }
}

/// Bump centers `n·q((i − 1/2)/p)` at the MP quantiles and widths
/// `n·(q(i/p) − q((i − 1)/p))` unless a width is configured.
fn bumps(config: &ExperimentConfig, model: &MpModel<f64>) -> Result<Vec<(f64, f64)>, HarnessError> {
    let (p, nf) = (config.p as f64, config.n as f64);
    let q = |t: f64| model.quantile(t).map_err(|e| HarnessError::Config(e.to_string()));
    config
        .params
        .indices
        .iter()
        .map(|&i| {
            let i = i as f64;
            let center = nf * q((i - 0.5) / p)?;
            let width = match config.params.g_scale {
                Some(s) => s,
                None => nf * (q(i / p)? - q((i - 1.0) / p)?),
            };
            Ok((center, width))
        })
        .collect()
}
