use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmt_lab::ensembles::{sample_matrix, DistributionSpec, Entries, EnsembleError, MatrixSample};
use rmt_lab::harness::{self, ExperimentConfig, ExperimentKind, GapScale, HarnessError, RunOptions};
use rmt_lab::linalg::{operator_norm, Matrix};
use rmt_lab::mp_law::{MpError, MpModel};
use rmt_lab::scalar::Scalar;
use rmt_lab::spectra::{self, SpectraError};
use rmt_lab::stats::{self, EdgeNormalization, StatsError};
use rmt_lab::Complex64;

#[derive(Parser)]
#[command(name = "rmt-lab", version, about = "Random matrix numerics for sample covariance matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one matrix and print it as JSON.
    Sample(SampleArgs),
    /// Print the ESD of one sample next to the Marchenko-Pastur CDF (CSV).
    Esd(SampleArgs),
    /// Run one identity verifier on a sample and print its report (JSON).
    Verify(VerifyArgs),
    /// Survey eigenvalue gaps.
    Gaps(ExperimentArgs),
    /// Survey singular vector delocalization.
    Deloc(ExperimentArgs),
    /// Figure 1: normalized smallest singular value squared for two laws.
    Figure1(ExperimentArgs),
    /// Compare a smooth eigenvalue statistic across ensembles.
    Fourmoment(ExperimentArgs),
    /// Interval counts against the Marchenko-Pastur law.
    Concentration(ExperimentArgs),
    /// Evaluate the Marchenko-Pastur law.
    Mp(MpArgs),
    /// Merge run directories produced from one config.
    Merge(MergeArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Entry law: a built-in name or a JSON spec.
    #[arg(long, default_value = "gaussian")]
    ensemble: String,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    /// Master seed.
    #[arg(long, env = "RMT_LAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyOp {
    Interlacing,
    Weyl,
    Coordinate,
    Identity,
    Schur,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    op: VerifyOp,
    #[command(flatten)]
    sample: SampleArgs,
    /// 1-based singular value index for the coordinate formula.
    #[arg(long, default_value_t = 1)]
    index: usize,
    /// Operator norm of the perturbation for the Weyl check.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Real part of z for the Schur check on M M*/n.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    z_re: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    z_im: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed.
    #[arg(long, env = "RMT_LAB_SEED")]
    seed: Option<u64>,
    /// Ensemble names; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    ensemble: Vec<String>,
    /// Histogram bins (figure1).
    #[arg(long)]
    bins: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// First trial index to run (for split runs).
    #[arg(long)]
    trial_start: Option<u64>,
    /// One past the last trial index to run.
    #[arg(long)]
    trial_end: Option<u64>,
    /// Keep every eigenvalue list in the records.
    #[arg(long)]
    full: bool,
    /// Use the edge normalization exactly as printed in the source formula.
    #[arg(long)]
    literal_edge: bool,
    /// Measure gaps on sqrt(p+n)·σ instead of n·λ (gaps).
    #[arg(long)]
    singular_gaps: bool,
    /// 1-based eigenvalue indices for the test function (fourmoment).
    #[arg(long, value_delimiter = ',')]
    indices: Vec<usize>,
    /// Bump width on the nλ scale (fourmoment).
    #[arg(long)]
    g_scale: Option<f64>,
    /// Interval length (concentration).
    #[arg(long)]
    interval_len: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MpEval {
    Density,
    Cdf,
    Quantile,
    Stieltjes,
    Pv,
    Edges,
}

#[derive(Args)]
struct MpArgs {
    /// Aspect ratio p/n in (0, 1].
    #[arg(long)]
    y: f64,
    #[arg(long, value_enum, default_value = "density")]
    eval: MpEval,
    /// Point (density, cdf, pv) or level (quantile).
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// Imaginary part of z for the Stieltjes transform (z = x + i·im).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    im: f64,
}

#[derive(Args)]
struct MergeArgs {
    /// Run directories to merge.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }
}

impl From<EnsembleError> for Failure {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::Quadrature(_) | EnsembleError::RejectionLimit(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<SpectraError> for Failure {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Shape(_) | SpectraError::Index { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<MpError> for Failure {
    fn from(e: MpError) -> Self {
        match e {
            MpError::Quadrature(_) | MpError::DegenerateDenominator(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Csv(_) => Failure::Io(e.to_string()),
            StatsError::Invalid(_) | StatsError::Index(_) | StatsError::HardEdge(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => Failure::Usage(e.to_string()),
            HarnessError::Stats(s) => s.into(),
            _ => Failure::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Failure::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializes");
    s.push('\n');
    s
}

fn draw(a: &SampleArgs) -> Result<MatrixSample, Failure> {
    let spec = DistributionSpec::from_name(&a.ensemble)?;
    Ok(sample_matrix(&spec, a.p, a.n, a.seed, a.trial)?)
}

fn sample(a: &SampleArgs) -> Result<(), Failure> {
    emit(a.out.as_ref(), &pretty(&draw(a)?))
}

fn esd(a: &SampleArgs) -> Result<(), Failure> {
    let s = draw(a)?;
    let lambdas = spectra::covariance_spectrum(&s)?;
    let model = MpModel::<f64>::for_shape(a.p, a.n)?;
    let e = stats::esd(&lambdas)?;
    let ecdf: Vec<f64> = e.values().iter().map(|&x| e.ecdf(x)).collect();
    let mp = e.values().iter().map(|&x| model.cdf(x)).collect::<Result<Vec<f64>, _>>()?;
    let mut buf = Vec::new();
    stats::write_columns(&mut buf, "lambda", e.values(), &[("ecdf", &ecdf), ("mp_cdf", &mp)])?;
    emit(a.out.as_ref(), &String::from_utf8(buf).expect("csv is utf-8"))
}

/// `M + eps·E/‖E‖_op` with `E` the next trial of the same law.
fn perturbed<F: Scalar<Real = f64>>(m: &Matrix<F>, e: &Matrix<F>, eps: f64) -> Result<Matrix<F>, Failure> {
    let op = operator_norm(e).map_err(|err| Failure::Numerical(err.to_string()))?;
    m.add(&e.map(|x| x.scale(eps / op))).map_err(|err| Failure::Numerical(err.to_string()))
}

fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let s = draw(&a.sample)?;
    let out = a.sample.out.as_ref();
    match a.op {
        VerifyOp::Interlacing => emit(out, &pretty(&spectra::verify_interlacing_law(&s)?)),
        VerifyOp::Coordinate => emit(out, &pretty(&spectra::verify_coordinate_formula(&s, a.index)?)),
        VerifyOp::Identity => emit(out, &pretty(&spectra::verify_interlacing_identity(&s)?)),
        VerifyOp::Weyl => {
            let spec = DistributionSpec::from_name(&a.sample.ensemble)?;
            let e = sample_matrix(&spec, a.sample.p, a.sample.n, a.sample.seed, a.sample.trial.wrapping_add(1))?;
            let mut other = s.clone();
            other.entries = match (&s.entries, &e.entries) {
                (Entries::Real(m), Entries::Real(d)) => Entries::Real(perturbed(m, d, a.eps)?),
                _ => Entries::Complex(perturbed(&s.entries.to_complex(), &e.entries.to_complex(), a.eps)?),
            };
            emit(out, &pretty(&spectra::verify_weyl(&s, &other)?))
        }
        VerifyOp::Schur => {
            let nf = a.sample.n as f64;
            let z = Complex64::new(a.z_re, a.z_im);
            let report = match &s.entries {
                Entries::Real(m) => spectra::verify_schur_stieltjes(&m.gram_rows().map(|x| x / nf), z)?,
                Entries::Complex(m) => spectra::verify_schur_stieltjes(&m.gram_rows().map(|x| x / nf), z)?,
            };
            emit(out, &pretty(&report))
        }
    }
}

fn default_config(kind: ExperimentKind) -> ExperimentConfig {
    match kind {
        ExperimentKind::Figure1 => ExperimentConfig::canonical_figure1(),
        ExperimentKind::Fourmoment => ExperimentConfig::new(kind, &["gaussian_real", "gauss4"], 150, 200, 2000, 0),
        _ => ExperimentConfig::new(kind, &["gaussian_real", "rademacher"], 300, 400, 100, 0),
    }
}

fn experiment(kind: ExperimentKind, a: &ExperimentArgs) -> Result<(), Failure> {
    let mut config = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let c = ExperimentConfig::from_json(&text)?;
            if c.kind != kind {
                return Err(Failure::Usage(format!("{} is a {} config", path.display(), c.kind.as_str())));
            }
            c
        }
        None => default_config(kind),
    };
    if let Some(p) = a.p {
        config.p = p;
    }
    if let Some(n) = a.n {
        config.n = n;
    }
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if let Some(s) = a.seed {
        config.master_seed = s;
    }
    if !a.ensemble.is_empty() {
        config.ensembles = a.ensemble.clone();
    }
    if let Some(b) = a.bins {
        config.params.bins = b;
    }
    if let Some(w) = a.workers {
        config.workers = w;
    }
    if a.full {
        config.params.full = true;
    }
    if a.literal_edge {
        config.params.edge_normalization = EdgeNormalization::Literal;
    }
    if a.singular_gaps {
        config.params.gap_scale = GapScale::SingularValue;
    }
    if !a.indices.is_empty() {
        config.params.indices = a.indices.clone();
    }
    if a.g_scale.is_some() {
        config.params.g_scale = a.g_scale;
    }
    if let Some(l) = a.interval_len {
        config.params.interval_len = l;
    }
    config.validate()?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}-out", kind.as_str())));
    let options = RunOptions {
        workers: None,
        trials: match (a.trial_start, a.trial_end) {
            (None, None) => None,
            (s, e) => Some(s.unwrap_or(0)..e.unwrap_or(config.trials)),
        },
    };
    let artifact = harness::run_with(&config, &out, &options)?;
    eprintln!(
        "{}: {} new records, {} total, summary in {}",
        kind.as_str(),
        artifact.new_records,
        artifact.records.len(),
        artifact.summary_path().display()
    );
    emit(None, &pretty(&artifact.summary))
}

fn mp(a: &MpArgs) -> Result<(), Failure> {
    let model = MpModel::<f64>::new(a.y)?;
    let need_x = || a.x.ok_or_else(|| Failure::Usage("--x is required for this evaluation".into()));
    let value = match a.eval {
        MpEval::Density => serde_json::json!(model.density(need_x()?)),
        MpEval::Cdf => serde_json::json!(model.cdf(need_x()?)?),
        MpEval::Quantile => serde_json::json!(model.quantile(need_x()?)?),
        MpEval::Pv => serde_json::json!(model.pv_edge_integral(need_x()?)?),
        MpEval::Stieltjes => {
            let s = model.stieltjes(Complex64::new(need_x()?, a.im))?;
            serde_json::json!({ "re": s.re, "im": s.im })
        }
        MpEval::Edges => serde_json::json!({ "a": model.lower_edge(), "b": model.upper_edge() }),
    };
    emit(None, &format!("{value}\n"))
}

fn merge(a: &MergeArgs) -> Result<(), Failure> {
    let artifact = harness::merge(&a.inputs, &a.out)?;
    emit(None, &pretty(&artifact.summary))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Sample(a) => sample(a),
        Command::Esd(a) => esd(a),
        Command::Verify(a) => verify(a),
        Command::Gaps(a) => experiment(ExperimentKind::Gaps, a),
        Command::Deloc(a) => experiment(ExperimentKind::Deloc, a),
        Command::Figure1(a) => experiment(ExperimentKind::Figure1, a),
        Command::Fourmoment(a) => experiment(ExperimentKind::Fourmoment, a),
        Command::Concentration(a) => experiment(ExperimentKind::Concentration, a),
        Command::Mp(a) => mp(a),
        Command::Merge(a) => merge(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
