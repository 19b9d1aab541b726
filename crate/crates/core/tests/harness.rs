use std::fs;
use std::path::{Path, PathBuf};

use rmt_lab::harness::*;
use tempfile::TempDir;

fn small_figure1(trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(ExperimentKind::Figure1, &["gaussian_real", "rademacher"], 12, 20, trials, seed)
}

fn summary_bytes(dir: &Path) -> String {
    fs::read_to_string(dir.join(SUMMARY_FILE)).unwrap()
}

fn lines(dir: &Path) -> Vec<String> {
    canonical_record_lines(&dir.join(RECORDS_FILE)).unwrap()
}

fn sub(tmp: &TempDir, name: &str) -> PathBuf {
    tmp.path().join(name)
}

#[test]
fn single_trial_runs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let c = small_figure1(1, 7);
    let a = run(&c, &sub(&tmp, "a")).unwrap();
    let b = run(&c, &sub(&tmp, "b")).unwrap();
    assert_eq!(a.records.len(), 2);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert!(x.same_body(y));
    }
    assert_eq!(lines(&a.dir), lines(&b.dir));
    assert_eq!(summary_bytes(&a.dir), summary_bytes(&b.dir));
    // one point per ensemble: the ECDFs either coincide or are disjoint steps
    let ks = a.summary.figure1.unwrap().ks_distance;
    assert!(ks == 0.0 || ks == 1.0, "{ks}");
}

#[test]
fn resume_computes_exactly_the_missing_records() {
    let tmp = TempDir::new().unwrap();
    let c = small_figure1(40, 3);
    let dir = sub(&tmp, "run");
    let first = run_with(&c, &dir, &RunOptions { trials: Some(0..20), ..Default::default() }).unwrap();
    assert_eq!(first.new_records, 40);
    assert!(!first.summary.complete);
    let second = run(&c, &dir).unwrap();
    assert_eq!(second.new_records, 40);
    assert!(second.summary.complete);
    let all = lines(&dir);
    let mut unique = all.clone();
    unique.dedup();
    assert_eq!(all.len(), 80);
    assert_eq!(unique.len(), 80);
    let again = run(&c, &dir).unwrap();
    assert_eq!(again.new_records, 0);

    let fresh = run(&c, &sub(&tmp, "fresh")).unwrap();
    assert_eq!(summary_bytes(&dir), summary_bytes(&fresh.dir));
    assert_eq!(all, lines(&fresh.dir));
}

#[test]
fn torn_final_line_is_recomputed() {
    let tmp = TempDir::new().unwrap();
    let c = small_figure1(6, 1);
    let dir = sub(&tmp, "run");
    run_with(&c, &dir, &RunOptions { trials: Some(0..3), ..Default::default() }).unwrap();
    let path = dir.join(RECORDS_FILE);
    let mut text = fs::read_to_string(&path).unwrap();
    // chop the last record in half
    text.truncate(text.len() - 40);
    fs::write(&path, &text).unwrap();
    let (_, torn) = read_records(&path).unwrap();
    assert!(torn);
    let done = run(&c, &dir).unwrap();
    assert_eq!(done.new_records, 7);
    assert_eq!(summary_bytes(&dir), summary_bytes(&run(&c, &sub(&tmp, "fresh")).unwrap().dir));

    fs::write(&path, "{not json}\n").unwrap();
    assert!(matches!(run(&c, &dir), Err(HarnessError::Corrupt { line: 1, .. })));
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    for (k, kind) in [ExperimentKind::Figure1, ExperimentKind::Gaps, ExperimentKind::Deloc].into_iter().enumerate() {
        let mut c = ExperimentConfig::new(kind, &["gaussian_real", "bernoulli-complex"], 10, 16, 24, 100 + k as u64);
        let one = run(&c, &sub(&tmp, &format!("one{k}"))).unwrap();
        c.workers = 8;
        let eight = run(&c, &sub(&tmp, &format!("eight{k}"))).unwrap();
        assert_eq!(lines(&one.dir), lines(&eight.dir));
        assert_eq!(summary_bytes(&one.dir), summary_bytes(&eight.dir));
        assert_eq!(one.summary.config_hash, eight.summary.config_hash);
    }
}

#[test]
fn merge_behaviour() {
    let tmp = TempDir::new().unwrap();
    let c = small_figure1(30, 9);
    let whole = run(&c, &sub(&tmp, "whole")).unwrap();
    let lo = run_with(&c, &sub(&tmp, "lo"), &RunOptions { trials: Some(0..15), ..Default::default() }).unwrap();
    let hi = run_with(&c, &sub(&tmp, "hi"), &RunOptions { trials: Some(15..30), workers: Some(3) }).unwrap();

    let halves = merge(&[lo.dir.clone(), hi.dir.clone()], &sub(&tmp, "halves")).unwrap();
    assert_eq!(summary_bytes(&halves.dir), summary_bytes(&whole.dir));
    assert_eq!(lines(&halves.dir), lines(&whole.dir));

    let same = merge(&[whole.dir.clone(), whole.dir.clone()], &sub(&tmp, "same")).unwrap();
    assert_eq!(summary_bytes(&same.dir), summary_bytes(&whole.dir));
    assert_eq!(lines(&same.dir), lines(&whole.dir));

    // tamper with one record of a copy
    let bad = sub(&tmp, "bad");
    fs::create_dir_all(&bad).unwrap();
    fs::copy(whole.dir.join(CONFIG_FILE), bad.join(CONFIG_FILE)).unwrap();
    let mut recs = read_records(&whole.dir.join(RECORDS_FILE)).unwrap().0;
    recs[0].stats.edge_value = recs[0].stats.edge_value.map(|v| v + 1.0);
    let text: String = recs.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();
    fs::write(bad.join(RECORDS_FILE), text).unwrap();
    assert!(matches!(merge(&[whole.dir.clone(), bad], &sub(&tmp, "x")), Err(HarnessError::Integrity { .. })));

    let other = run(&small_figure1(30, 10), &sub(&tmp, "other")).unwrap();
    assert!(matches!(merge(&[whole.dir.clone(), other.dir], &sub(&tmp, "y")), Err(HarnessError::HashMismatch { .. })));
    assert!(matches!(run(&small_figure1(30, 10), &whole.dir), Err(HarnessError::HashMismatch { .. })));
}

#[test]
fn figure1_outputs() {
    let tmp = TempDir::new().unwrap();
    let mut c = small_figure1(200, 4);
    c.params.bins = 25;
    let out = figure1(&c, &sub(&tmp, "f1")).unwrap();
    let t = figure1_tables(&c, &out.records).unwrap().unwrap();
    for h in &t.histograms {
        assert_eq!(h.densities.len(), 25);
        assert!((h.integral() - 1.0).abs() <= 1e-9);
    }
    let pdf = fs::read_to_string(out.dir.join("pdf.csv")).unwrap();
    let cdf = fs::read_to_string(out.dir.join("cdf.csv")).unwrap();
    assert_eq!(pdf.lines().next().unwrap(), "x,pdf_gaussian_real,pdf_rademacher");
    assert_eq!(cdf.lines().next().unwrap(), "x,cdf_gaussian_real,cdf_rademacher");
    assert_eq!(pdf.lines().count(), 26);
    let last: Vec<f64> = cdf.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(&last[1..], &[1.0, 1.0]);
    let f = out.summary.figure1.as_ref().unwrap();
    assert_eq!(f.bins, 25);
    assert_eq!(out.summary.comparisons[0].ks_distance, f.ks_distance);
    let (center, scale) = rmt_lab::stats::edge_constants(12, 20, Default::default()).unwrap();
    for r in &out.records {
        let s = r.stats.sigma_min_sq.unwrap();
        assert!((r.stats.edge_value.unwrap() - (s - center) / scale).abs() < 1e-12);
    }
    assert!(figure1(&ExperimentConfig::new(ExperimentKind::Gaps, &["gaussian"], 3, 4, 1, 0), &sub(&tmp, "g")).is_err());
}

#[test]
fn two_gaussian_samples_pass_the_ks_critical_value() {
    let tmp = TempDir::new().unwrap();
    // a second name for the real Gaussian law with its own streams
    let alias = "gauss-div:t=0.5:base=gaussian";
    let reps = 20;
    let below = (0..reps)
        .filter(|&r| {
            let c = ExperimentConfig::new(ExperimentKind::Figure1, &["gaussian_real", alias], 6, 12, 1000, 1000 + r);
            figure1(&c, &sub(&tmp, &format!("rep{r}"))).unwrap().summary.figure1.unwrap().ks_distance <= 0.061
        })
        .count();
    assert!(below as f64 >= 0.9 * reps as f64, "{below}/{reps}");
}

#[test]
fn four_moment_paths() {
    let tmp = TempDir::new().unwrap();
    let same = ExperimentConfig::new(ExperimentKind::Fourmoment, &["gaussian_real", "gaussian"], 15, 20, 50, 2);
    let out = four_moment_experiment(&same, &sub(&tmp, "same")).unwrap();
    let cmp = &out.summary.comparisons[0];
    assert_eq!(cmp.difference, 0.0);
    assert_eq!(cmp.within_3se, Some(true));

    let mut rad = ExperimentConfig::new(ExperimentKind::Fourmoment, &["gaussian_real", "rademacher"], 15, 20, 50, 2);
    rad.params.indices = vec![1, 8];
    let out = four_moment_experiment(&rad, &sub(&tmp, "rad")).unwrap();
    let cmp = &out.summary.comparisons[0];
    assert!(cmp.difference.is_finite() && cmp.pooled_se > 0.0);
    assert!(out.records.iter().all(|r| r.stats.g_value.is_some_and(|g| (0.0..=1.0).contains(&g))));

    let one = ExperimentConfig::new(ExperimentKind::Fourmoment, &["gaussian_real"], 15, 20, 5, 2);
    assert!(four_moment_experiment(&one, &sub(&tmp, "one")).is_err());
    let mut bad = rad.clone();
    bad.params.indices = vec![3, 2];
    assert!(matches!(bad.validate(), Err(HarnessError::Config(_))));
    bad.params.indices = vec![16];
    assert!(bad.validate().is_err());
}

#[test]
fn survey_kinds_record_their_statistics() {
    let tmp = TempDir::new().unwrap();
    let gaps = gap_survey(&ExperimentConfig::new(ExperimentKind::Gaps, &["gaussian_real"], 2, 5, 10, 0), &sub(&tmp, "gaps")).unwrap();
    assert!(gaps.records.iter().all(|r| r.stats.gap_argmin == Some(1)));
    let s = &gaps.summary.ensembles["gaussian_real"];
    assert_eq!(s.thresholds.len(), 1);
    assert_eq!(s.edge_argmin_fraction, Some(1.0));

    let mut conc = ExperimentConfig::new(ExperimentKind::Concentration, &["gaussian_real"], 30, 40, 4, 0);
    conc.params.full = true;
    let out = run(&conc, &sub(&tmp, "conc")).unwrap();
    for r in &out.records {
        assert_eq!(r.stats.lambdas.as_ref().unwrap().len(), 30);
        // eigenvalues below a fall outside every interval
        assert!(r.stats.interval_counts.as_ref().unwrap().iter().sum::<usize>() <= 30);
        assert!(r.stats.max_deviation.unwrap() >= 0.0);
    }

    let deloc = run(&ExperimentConfig::new(ExperimentKind::Deloc, &["rademacher"], 8, 10, 4, 0), &sub(&tmp, "deloc")).unwrap();
    assert!(deloc.records.iter().all(|r| r.stats.delocalization.unwrap() >= 1.0 - 1e-12 && r.stats.lambdas.is_none()));

    let mp = run(&ExperimentConfig::new(ExperimentKind::MpConvergence, &["gaussian_complex"], 20, 40, 4, 0), &sub(&tmp, "mp")).unwrap();
    assert!(mp.records.iter().all(|r| (0.0..=1.0).contains(&r.stats.sup_distance.unwrap())));
}

#[test]
fn config_validation() {
    let good = serde_json::to_value(small_figure1(5, 0)).unwrap();
    assert!(ExperimentConfig::from_json(&good.to_string()).is_ok());

    let mut extra = good.clone();
    extra["colour"] = "blue".into();
    assert!(ExperimentConfig::from_json(&extra.to_string()).is_err());
    let mut extra_param = good.clone();
    extra_param["params"]["smoothing"] = 1.into();
    assert!(ExperimentConfig::from_json(&extra_param.to_string()).is_err());
    let mut schema = good.clone();
    schema["schema"] = 2.into();
    assert!(ExperimentConfig::from_json(&schema.to_string()).is_err());

    for c in [
        small_figure1(0, 0),
        ExperimentConfig::new(ExperimentKind::Figure1, &["gaussian_real", "rademacher"], 21, 20, 5, 0),
        ExperimentConfig::new(ExperimentKind::Figure1, &["gaussian_real", "rademacher"], 20, 20, 5, 0),
        ExperimentConfig::new(ExperimentKind::Figure1, &["gaussian_real"], 12, 20, 5, 0),
        ExperimentConfig::new(ExperimentKind::Deloc, &["cauchy"], 12, 20, 5, 0),
        ExperimentConfig::new(ExperimentKind::Deloc, &["gaussian", "gaussian"], 12, 20, 5, 0),
    ] {
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))), "{c:?}");
    }

    let mut c = small_figure1(5, 0);
    let h = c.hash();
    c.workers = 8;
    assert_eq!(c.hash(), h);
    c.params.bins = 41;
    assert_ne!(c.hash(), h);
    assert_eq!(h.len(), 16);

    let canonical = ExperimentConfig::canonical_figure1();
    assert_eq!((canonical.p, canonical.n, canonical.trials), (600, 800, 1000));
    assert!(canonical.validate().is_ok());
}
