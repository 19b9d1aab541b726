use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, SCHEMA_VERSION};
use super::trial::{RunRecord, TrialStatus};
use super::HarnessError;
use crate::stats::{ks_distance, EdgeNormalization, EmpiricalDistribution, Histogram};

/// Above this failed fraction the summary is marked invalid.
pub const MAX_FAILED_FRACTION: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFraction {
    pub label: String,
    pub threshold: f64,
    /// Fraction of successful trials on the wrong side of the threshold.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub trials_ok: usize,
    pub failed: usize,
    /// Name of the summarized per-trial statistic.
    pub statistic: String,
    pub mean: Option<f64>,
    /// Standard error of the mean.
    pub std_error: Option<f64>,
    pub median: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thresholds: Vec<ThresholdFraction>,
    /// Gaps: fraction of trials whose smallest gap touches `λ_1` or `λ_p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_argmin_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    /// `mean_a − mean_b`.
    pub difference: f64,
    /// `√(se_a² + se_b²)`.
    pub pooled_se: f64,
    pub ks_distance: f64,
    /// Four-moment experiments: `|difference| ≤ 3 pooled_se`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within_3se: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1Summary {
    pub bins: usize,
    pub lo: f64,
    pub hi: f64,
    pub edge_normalization: EdgeNormalization,
    pub center: f64,
    pub scale: f64,
    pub ks_distance: f64,
}

/// Pure function of the config and the sorted successful records; contains
/// no timing or execution details.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub kind: ExperimentKind,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub trials_expected: u64,
    pub records: usize,
    pub failed: usize,
    pub complete: bool,
    /// More than [`MAX_FAILED_FRACTION`] of the records failed.
    pub invalid: bool,
    pub ensembles: BTreeMap<String, EnsembleSummary>,
    pub comparisons: Vec<Comparison>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure1: Option<Figure1Summary>,
}

fn statistic_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Figure1 => "edge_value",
        ExperimentKind::Fourmoment => "g_value",
        ExperimentKind::Gaps => "min_normalized_gap",
        ExperimentKind::Deloc => "delocalization",
        ExperimentKind::Concentration => "max_deviation",
        ExperimentKind::MpConvergence => "sup_distance",
    }
}

/// Primary statistic per ensemble, in trial order.
pub(crate) fn primary_values<'a>(config: &ExperimentConfig, records: &'a [RunRecord]) -> BTreeMap<&'a str, Vec<f64>> {
    let mut out: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        if r.status == TrialStatus::Ok {
            if let Some(v) = r.stats.primary(config.kind) {
                out.entry(r.ensemble.as_str()).or_default().push(v);
            }
        }
    }
    out
}

/// `records` must be sorted by `(ensemble, trial)`.
pub fn summarize(config: &ExperimentConfig, records: &[RunRecord]) -> Result<Summary, HarnessError> {
    let values = primary_values(config, records);
    let nf = config.n as f64;
    let mut ensembles = BTreeMap::new();
    let mut dists: BTreeMap<&str, (EmpiricalDistribution, f64, f64)> = BTreeMap::new();
    for name in &config.ensembles {
        let mine: Vec<&RunRecord> = records.iter().filter(|r| &r.ensemble == name).collect();
        let failed = mine.iter().filter(|r| r.status == TrialStatus::Failed).count();
        let vals = values.get(name.as_str()).cloned().unwrap_or_default();
        let dist = EmpiricalDistribution::new(vals.clone()).ok();
        let (mean, se) = match &dist {
            Some(d) => (Some(d.mean()), Some(d.std_dev() / (d.len() as f64).sqrt())),
            None => (None, None),
        };
        let frac = |pred: &dyn Fn(f64) -> bool| {
            if vals.is_empty() {
                0.0
            } else {
                vals.iter().filter(|&&v| pred(v)).count() as f64 / vals.len() as f64
            }
        };
        let mut thresholds = Vec::new();
        let mut edge_argmin_fraction = None;
        match config.kind {
            ExperimentKind::Gaps => {
                for &c in &config.params.gap_exponents {
                    let t = nf.powf(-c);
                    thresholds.push(ThresholdFraction { label: format!("min_normalized_gap < n^-{c}"), threshold: t, fraction: frac(&|v| v < t) });
                }
                let argmins: Vec<usize> = mine.iter().filter_map(|r| r.stats.gap_argmin).collect();
                if !argmins.is_empty() {
                    let edge = argmins.iter().filter(|&&i| i == 1 || i + 1 == config.p).count();
                    edge_argmin_fraction = Some(edge as f64 / argmins.len() as f64);
                }
            }
            ExperimentKind::Deloc => {
                let t = config.params.deloc_factor * nf.ln();
                thresholds.push(ThresholdFraction {
                    label: format!("delocalization > {} ln n", config.params.deloc_factor),
                    threshold: t,
                    fraction: frac(&|v| v > t),
                });
            }
            ExperimentKind::Concentration => {
                let t = config.params.concentration_threshold;
                thresholds.push(ThresholdFraction { label: format!("max_deviation > {t}"), threshold: t, fraction: frac(&|v| v > t) });
            }
            _ => {}
        }
        if let (Some(d), Some(m), Some(s)) = (&dist, mean, se) {
            dists.insert(name.as_str(), (d.clone(), m, s));
        }
        ensembles.insert(
            name.clone(),
            EnsembleSummary {
                trials_ok: vals.len(),
                failed,
                statistic: statistic_name(config.kind).into(),
                mean,
                std_error: se,
                median: dist.as_ref().map(|d| d.median()),
                min: dist.as_ref().map(|d| d.min()),
                max: dist.as_ref().map(|d| d.max()),
                thresholds,
                edge_argmin_fraction,
            },
        );
    }

    let mut comparisons = Vec::new();
    for (i, a) in config.ensembles.iter().enumerate() {
        for b in &config.ensembles[i + 1..] {
            if let (Some((da, ma, sa)), Some((db, mb, sb))) = (dists.get(a.as_str()), dists.get(b.as_str())) {
                let difference = ma - mb;
                let pooled_se = (sa * sa + sb * sb).sqrt();
                comparisons.push(Comparison {
                    a: a.clone(),
                    b: b.clone(),
                    difference,
                    pooled_se,
                    ks_distance: ks_distance(da, db),
                    within_3se: (config.kind == ExperimentKind::Fourmoment).then_some(difference.abs() <= 3.0 * pooled_se),
                });
            }
        }
    }

    let figure1 = if config.kind == ExperimentKind::Figure1 {
        figure1_tables(config, records)?.map(|t| t.summary)
    } else {
        None
    };

    let failed = records.iter().filter(|r| r.status == TrialStatus::Failed).count();
    let expected = config.trials as usize * config.ensembles.len();
    Ok(Summary {
        schema: SCHEMA_VERSION,
        kind: config.kind,
        config_hash: config.hash(),
        config: serde_json::from_str(&config.hashed_json()).expect("hashed config is JSON"),
        trials_expected: config.trials,
        records: records.len(),
        failed,
        complete: records.len() == expected,
        invalid: failed as f64 > MAX_FAILED_FRACTION * records.len() as f64,
        ensembles,
        comparisons,
        figure1,
    })
}

/// Aligned histogram and ECDF tables for the two figure-1 ensembles.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Tables {
    pub names: [String; 2],
    pub histograms: [Histogram; 2],
    /// Pooled sorted distinct values and both ECDFs at them.
    pub cdf_x: Vec<f64>,
    pub cdfs: [Vec<f64>; 2],
    pub summary: Figure1Summary,
}

impl Figure1Tables {
    pub fn write_csv(&self, dir: &std::path::Path) -> Result<(), HarnessError> {
        let centers = self.histograms[0].centers();
        let pdf_a = format!("pdf_{}", self.names[0]);
        let pdf_b = format!("pdf_{}", self.names[1]);
        let f = std::fs::File::create(dir.join("pdf.csv"))?;
        crate::stats::write_columns(
            f,
            "x",
            &centers,
            &[(&pdf_a, &self.histograms[0].densities), (&pdf_b, &self.histograms[1].densities)],
        )?;
        let cdf_a = format!("cdf_{}", self.names[0]);
        let cdf_b = format!("cdf_{}", self.names[1]);
        let f = std::fs::File::create(dir.join("cdf.csv"))?;
        crate::stats::write_columns(f, "x", &self.cdf_x, &[(&cdf_a, &self.cdfs[0]), (&cdf_b, &self.cdfs[1])])?;
        Ok(())
    }
}

/// `None` until both ensembles have at least one successful trial. Bins
/// span the pooled range of both samples.
pub fn figure1_tables(config: &ExperimentConfig, records: &[RunRecord]) -> Result<Option<Figure1Tables>, HarnessError> {
    let values = primary_values(config, records);
    let (a, b) = (&config.ensembles[0], &config.ensembles[1]);
    let (Some(va), Some(vb)) = (values.get(a.as_str()), values.get(b.as_str())) else {
        return Ok(None);
    };
    let da = EmpiricalDistribution::new(va.clone())?;
    let db = EmpiricalDistribution::new(vb.clone())?;
    let lo = da.min().min(db.min());
    let hi = da.max().max(db.max());
    let bins = config.params.bins;
    let histograms = [da.histogram_over(bins, lo, hi)?, db.histogram_over(bins, lo, hi)?];
    let mut cdf_x: Vec<f64> = da.values().iter().chain(db.values()).copied().collect();
    cdf_x.sort_by(f64::total_cmp);
    cdf_x.dedup();
    let cdfs = [cdf_x.iter().map(|&x| da.ecdf(x)).collect(), cdf_x.iter().map(|&x| db.ecdf(x)).collect()];
    let (center, scale) = crate::stats::edge_constants(config.p, config.n, config.params.edge_normalization)?;
    let summary = Figure1Summary {
        bins,
        lo: histograms[0].edges[0],
        hi: *histograms[0].edges.last().expect("edges"),
        edge_normalization: config.params.edge_normalization,
        center,
        scale,
        ks_distance: ks_distance(&da, &db),
    };
    Ok(Some(Figure1Tables { names: [a.clone(), b.clone()], histograms, cdf_x, cdfs, summary }))
}
