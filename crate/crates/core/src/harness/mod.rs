//! Seeded, resumable Monte Carlo experiments.
//!
//! A run directory holds
//!
//! - `config.json`: the effective config,
//! - `records.jsonl`: one [`RunRecord`] per line per `(trial, ensemble)`,
//!   appended in completion order,
//! - `summary.json`: the [`Summary`], recomputed from the records sorted by
//!   `(ensemble, trial)`,
//! - `pdf.csv` and `cdf.csv` for figure 1.
//!
//! Trial `t` of ensemble `e` depends only on the config and `(t, e)`, so
//! worker count, completion order, resumption and merging never change a
//! record body or the summary. Record keys: `config_hash`, `trial_index`,
//! `ensemble`, `seed`, `status` (`ok` or `failed`), `error`, `stats` and
//! `wall_time`; the `stats` keys present depend on the experiment kind (see
//! [`TrialStats`]). Floats use the shortest decimal that round-trips.

mod config;
mod summary;
mod trial;

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use thiserror::Error;

pub use config::{ensemble_seed, ExperimentConfig, ExperimentKind, GapScale, Params, SCHEMA_VERSION};
pub use summary::{
    figure1_tables, summarize, Comparison, EnsembleSummary, Figure1Summary, Figure1Tables, Summary, ThresholdFraction,
    MAX_FAILED_FRACTION,
};
pub use trial::{RunRecord, TrialStats, TrialStatus};

use trial::Context;

pub const CONFIG_FILE: &str = "config.json";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("config hash {found} does not match {expected}")]
    HashMismatch { expected: String, found: String },
    #[error("conflicting records for trial {trial} of {ensemble}")]
    Integrity { trial: u64, ensemble: String },
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
}

impl HarnessError {
    pub fn is_io(&self) -> bool {
        matches!(self, HarnessError::Io(_))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `config.workers`.
    pub workers: Option<usize>,
    /// Restricts the run to these trial indices.
    pub trials: Option<Range<u64>>,
}

#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub dir: PathBuf,
    /// Records computed by this invocation.
    pub new_records: usize,
    /// Sorted by `(ensemble, trial)`.
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

impl RunArtifact {
    pub fn summary_path(&self) -> PathBuf {
        self.dir.join(SUMMARY_FILE)
    }
}

/// Reads a records file. An unparsable final line without a trailing
/// newline is a torn write and is dropped; anything else unparsable is
/// corruption. Returns the records and whether a torn line was seen.
pub fn read_records(path: &Path) -> Result<(Vec<RunRecord>, bool), HarnessError> {
    let text = fs::read_to_string(path)?;
    let ends_clean = text.is_empty() || text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    let mut torn = false;
    for (k, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RunRecord>(line) {
            Ok(r) => out.push(r),
            Err(_) if k + 1 == lines.len() && !ends_clean => torn = true,
            Err(e) => return Err(HarnessError::Corrupt { path: path.to_path_buf(), line: k + 1, message: e.to_string() }),
        }
    }
    Ok((out, torn))
}

fn record_line(r: &RunRecord) -> String {
    let mut s = serde_json::to_string(r).expect("record serializes");
    s.push('\n');
    s
}

fn sort_records(records: &mut [RunRecord], config: &ExperimentConfig) {
    let order: BTreeMap<&str, usize> = config.ensembles.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    records.sort_by_key(|r| (order.get(r.ensemble.as_str()).copied().unwrap_or(usize::MAX), r.trial_index));
}

/// Inserts `r` keyed by `(trial, ensemble)`; a differing body under an
/// existing key is an integrity error.
fn insert_unique(map: &mut BTreeMap<(u64, String), RunRecord>, r: RunRecord) -> Result<(), HarnessError> {
    let key = (r.trial_index, r.ensemble.clone());
    if let Some(old) = map.get(&key) {
        if !old.same_body(&r) {
            return Err(HarnessError::Integrity { trial: r.trial_index, ensemble: r.ensemble });
        }
        return Ok(());
    }
    map.insert(key, r);
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `summary.json` (and figure 1 tables) for sorted records.
fn finish(config: &ExperimentConfig, dir: &Path, records: Vec<RunRecord>, new_records: usize) -> Result<RunArtifact, HarnessError> {
    let summary = summarize(config, &records)?;
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    if config.kind == ExperimentKind::Figure1 {
        if let Some(t) = figure1_tables(config, &records)? {
            t.write_csv(dir)?;
        }
    }
    Ok(RunArtifact { dir: dir.to_path_buf(), new_records, records, summary })
}

pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifact, HarnessError> {
    run_with(config, out_dir, &RunOptions::default())
}

/// Runs every `(trial, ensemble)` pair not already recorded in `out_dir`.
pub fn run_with(config: &ExperimentConfig, out_dir: &Path, options: &RunOptions) -> Result<RunArtifact, HarnessError> {
    let ctx = Context::new(config)?;
    fs::create_dir_all(out_dir)?;
    write_json(&out_dir.join(CONFIG_FILE), config)?;
    let records_path = out_dir.join(RECORDS_FILE);

    let mut done: BTreeMap<(u64, String), RunRecord> = BTreeMap::new();
    if records_path.exists() {
        let (existing, torn) = read_records(&records_path)?;
        for r in existing {
            if r.config_hash != ctx.hash {
                return Err(HarnessError::HashMismatch { expected: ctx.hash.clone(), found: r.config_hash });
            }
            insert_unique(&mut done, r)?;
        }
        if torn {
            // rewrite without the torn tail so appends start on a fresh line
            let mut text = String::new();
            for r in done.values() {
                text.push_str(&record_line(r));
            }
            fs::write(&records_path, text)?;
        }
    }

    let range = options.trials.clone().unwrap_or(0..config.trials);
    let range = range.start..range.end.min(config.trials);
    let pending: Vec<(usize, u64)> = range
        .flat_map(|t| (0..config.ensembles.len()).map(move |e| (e, t)))
        .filter(|&(e, t)| !done.contains_key(&(t, config.ensembles[e].clone())))
        .collect();

    let workers = options.workers.unwrap_or(config.workers).max(1).min(pending.len().max(1));
    let mut file = OpenOptions::new().create(true).append(true).open(&records_path)?;
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<RunRecord>();
    let mut write_error = None;
    let mut new_records = 0;
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, abort, pending, ctx) = (&next, &abort, &pending, &ctx);
            scope.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(e, t)) = pending.get(k) else { break };
                if tx.send(ctx.trial(e, t)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for r in rx {
            if write_error.is_some() {
                continue;
            }
            // one write call per line keeps records whole
            match file.write_all(record_line(&r).as_bytes()).and_then(|_| file.flush()) {
                Ok(()) => {
                    new_records += 1;
                    done.insert((r.trial_index, r.ensemble.clone()), r);
                }
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    write_error = Some(e);
                }
            }
        }
    });
    if let Some(e) = write_error {
        return Err(e.into());
    }

    let mut records: Vec<RunRecord> = done.into_values().collect();
    sort_records(&mut records, config);
    finish(config, out_dir, records, new_records)
}

/// Reads the config of a run directory.
pub fn read_config(dir: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(dir.join(CONFIG_FILE))?;
    ExperimentConfig::from_json(&text)
}

/// Deduplicated union of run directories sharing one config hash.
pub fn merge(inputs: &[PathBuf], out_dir: &Path) -> Result<RunArtifact, HarnessError> {
    let Some(first) = inputs.first() else {
        return Err(HarnessError::Config("nothing to merge".into()));
    };
    let config = read_config(first)?;
    let hash = config.hash();
    let mut map = BTreeMap::new();
    for dir in inputs {
        let c = read_config(dir)?;
        if c.hash() != hash {
            return Err(HarnessError::HashMismatch { expected: hash.clone(), found: c.hash() });
        }
        let path = dir.join(RECORDS_FILE);
        if !path.exists() {
            continue;
        }
        for r in read_records(&path)?.0 {
            if r.config_hash != hash {
                return Err(HarnessError::HashMismatch { expected: hash.clone(), found: r.config_hash });
            }
            insert_unique(&mut map, r)?;
        }
    }
    let mut records: Vec<RunRecord> = map.into_values().collect();
    sort_records(&mut records, &config);
    fs::create_dir_all(out_dir)?;
    write_json(&out_dir.join(CONFIG_FILE), &config)?;
    let mut f = File::create(out_dir.join(RECORDS_FILE))?;
    for r in &records {
        f.write_all(record_line(r).as_bytes())?;
    }
    f.flush()?;
    finish(&config, out_dir, records, 0)
}

fn require_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<(), HarnessError> {
    if config.kind != kind {
        return Err(HarnessError::Config(format!("expected a {} config, got {}", kind.as_str(), config.kind.as_str())));
    }
    Ok(())
}

/// Figure 1: normalized `σ_1²` for two ensembles, PDF/CDF tables and KS.
pub fn figure1(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifact, HarnessError> {
    require_kind(config, ExperimentKind::Figure1)?;
    run(config, out_dir)
}

/// Four-moment comparison of `E G` across ensembles.
pub fn four_moment_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifact, HarnessError> {
    require_kind(config, ExperimentKind::Fourmoment)?;
    if config.ensembles.len() < 2 {
        return Err(HarnessError::Config("the four-moment comparison needs at least two ensembles".into()));
    }
    run(config, out_dir)
}

pub fn gap_survey(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifact, HarnessError> {
    require_kind(config, ExperimentKind::Gaps)?;
    run(config, out_dir)
}

/// Lines of a records file with `wall_time` removed, sorted; equal for runs
/// that differ only in scheduling.
pub fn canonical_record_lines(path: &Path) -> Result<Vec<String>, HarnessError> {
    let f = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in f.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut r: RunRecord =
            serde_json::from_str(&line).map_err(|e| HarnessError::Corrupt { path: path.to_path_buf(), line: out.len() + 1, message: e.to_string() })?;
        r.wall_time = 0.0;
        out.push(serde_json::to_string(&r).expect("record serializes"));
    }
    out.sort();
    Ok(out)
}
