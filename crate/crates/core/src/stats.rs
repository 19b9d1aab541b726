//! Spectral statistics: empirical distributions, interval counts,
//! delocalization, gaps, `Q_i`, the regularized gap, soft-edge normalization
//! and two-sample distances.
//!
//! Index arguments are 1-based, as in `σ_i`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensembles::{sample_entries, CounterRng, DistributionSpec, EnsembleError, Kind};
use crate::mp_law::{MpError, MpModel};
use crate::scalar::{Real, Scalar};
use crate::spectra::SpectralDecomposition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty sample")]
    Empty,
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("values are not sorted ascending at position {0}")]
    Unsorted(usize),
    #[error("invalid index: {0}")]
    Index(String),
    #[error("sigma_{index} coincides with sigma_{other}")]
    Degenerate { index: usize, other: usize },
    #[error("soft-edge normalization needs p < n, got p = n = {0}")]
    HardEdge(usize),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Mp(#[from] MpError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("csv output failed: {0}")]
    Csv(String),
}

/// A sorted sample with its step-function CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::Empty);
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(k));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `#{v ≤ x} / len`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sample standard deviation (divisor `len − 1`); zero for one value.
    pub fn std_dev(&self) -> f64 {
        let k = self.values.len();
        if k < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (k - 1) as f64).sqrt()
    }

    /// Linear interpolation between order statistics.
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let h = q * (self.values.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        self.values[lo] + (h - lo as f64) * (self.values[hi] - self.values[lo])
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// `bins` equal bins over `[min, max]`.
    pub fn histogram(&self, bins: usize) -> Result<Histogram, StatsError> {
        self.histogram_over(bins, self.min(), self.max())
    }

    /// `bins` equal bins over `[lo, hi]`; values outside are counted in the
    /// total but fall in no bin. A zero-width range is widened to one unit.
    pub fn histogram_over(&self, bins: usize, lo: f64, hi: f64) -> Result<Histogram, StatsError> {
        if bins == 0 {
            return Err(StatsError::Invalid("histogram needs at least one bin".into()));
        }
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(StatsError::Invalid(format!("bad histogram range [{lo}, {hi}]")));
        }
        let (lo, hi) = if hi == lo { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + k as f64 * width }).collect();
        let mut counts = vec![0usize; bins];
        for &v in &self.values {
            if v < lo || v > hi {
                continue;
            }
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let total = self.values.len() as f64;
        let densities = counts.iter().map(|&c| c as f64 / (total * width)).collect();
        Ok(Histogram { edges, counts, densities })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `count / (total · width)`.
    pub densities: Vec<f64>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// `Σ density · width`; one when no value fell outside the range.
    pub fn integral(&self) -> f64 {
        self.edges.windows(2).zip(&self.densities).map(|(w, d)| d * (w[1] - w[0])).sum()
    }
}

/// Fixed 12-significant-digit rendering used in CSV output.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes a header and one row per `x`, each column formatted by
/// [`format_sig12`].
pub fn write_columns<W: Write>(out: W, x_name: &str, x: &[f64], columns: &[(&str, &[f64])]) -> Result<(), StatsError> {
    if let Some((name, _)) = columns.iter().find(|(_, c)| c.len() != x.len()) {
        return Err(StatsError::Invalid(format!("column {name} length differs from {x_name}")));
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| StatsError::Csv(e.to_string());
    let mut header = vec![x_name.to_string()];
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for (k, &xv) in x.iter().enumerate() {
        let mut row = vec![format_sig12(xv)];
        row.extend(columns.iter().map(|(_, c)| format_sig12(c[k])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| StatsError::Csv(e.to_string()))
}

/// Empirical spectral distribution of the nontrivial eigenvalues.
pub fn esd(lambdas: &[f64]) -> Result<EmpiricalDistribution, StatsError> {
    EmpiricalDistribution::new(lambdas.to_vec())
}

/// `sup_x |F^W(x) − F_MP(x)|`. The supremum is attained at a jump, so it
/// is the largest gap between the law's CDF and either side of each step.
pub fn mp_sup_distance(lambdas: &[f64], model: &MpModel<f64>) -> Result<f64, StatsError> {
    let e = esd(lambdas)?;
    let v = e.values();
    let p = v.len() as f64;
    let mut best: f64 = 0.0;
    let mut k = 0;
    while k < v.len() {
        let mut j = k;
        while j < v.len() && v[j] == v[k] {
            j += 1;
        }
        let f = model.cdf(v[k])?;
        best = best.max((f - k as f64 / p).abs()).max((j as f64 / p - f).abs());
        k = j;
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub lo: f64,
    pub hi: f64,
    /// `N_I`.
    pub count: usize,
    /// `p ∫_I ρ`.
    pub expected: f64,
    /// `|N_I − expected| / (p |I|)`.
    pub deviation: f64,
}

/// Counts eigenvalues in `[lo, hi]` against the law.
pub fn interval_report(lambdas: &[f64], model: &MpModel<f64>, lo: f64, hi: f64) -> Result<IntervalReport, StatsError> {
    if lambdas.is_empty() {
        return Err(StatsError::Empty);
    }
    if !(hi > lo) {
        return Err(StatsError::Invalid(format!("empty interval [{lo}, {hi}]")));
    }
    let p = lambdas.len() as f64;
    let count = lambdas.iter().filter(|&&l| lo <= l && l <= hi).count();
    let expected = p * model.mass_between(lo, hi)?;
    let deviation = (count as f64 - expected).abs() / (p * (hi - lo));
    Ok(IntervalReport { lo, hi, count, expected, deviation })
}

/// Splits `[a, b]` into consecutive intervals of length `interval_len`
/// starting at `a` (the last one may extend past `b`).
pub fn concentration_report(
    lambdas: &[f64],
    model: &MpModel<f64>,
    interval_len: f64,
) -> Result<Vec<IntervalReport>, StatsError> {
    if !(interval_len > 0.0 && interval_len.is_finite()) {
        return Err(StatsError::Invalid(format!("interval length {interval_len}")));
    }
    let (a, b) = (model.lower_edge(), model.upper_edge());
    let count = ((b - a) / interval_len).ceil().max(1.0) as usize;
    (0..count)
        .map(|k| {
            let lo = a + k as f64 * interval_len;
            interval_report(lambdas, model, lo, lo + interval_len)
        })
        .collect()
}

/// `√n · max |coefficient|` over all left and right singular vectors.
pub fn delocalization_stat<F: Scalar>(decomp: &SpectralDecomposition<F>) -> f64 {
    let max = decomp
        .right
        .as_slice()
        .iter()
        .chain(decomp.left.as_slice())
        .fold(0.0f64, |acc, x| acc.max(x.modulus().to_f64_lossy()));
    (decomp.n as f64).sqrt() * max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    /// `min_i (λ_{i+1} − λ_i)`.
    pub min_gap: f64,
    /// 1-based `i` of the smallest gap `λ_{i+1} − λ_i`.
    pub argmin: usize,
    /// `scale · (λ_{i+1} − λ_i)`.
    pub normalized_gaps: Vec<f64>,
    pub min_normalized_gap: f64,
    /// `(level, quantile)` of the normalized gaps.
    pub quantiles: Vec<(f64, f64)>,
}

pub const GAP_QUANTILE_LEVELS: [f64; 7] = [0.0, 0.01, 0.05, 0.5, 0.95, 0.99, 1.0];

/// Consecutive gaps of sorted eigenvalues, normalized by `n`.
pub fn gap_stats(lambdas: &[f64], n: usize) -> Result<GapSummary, StatsError> {
    gap_stats_scaled(lambdas, n as f64)
}

/// Consecutive gaps normalized by an arbitrary factor, e.g. `√(p+n)` for
/// singular values.
pub fn gap_stats_scaled(values: &[f64], scale: f64) -> Result<GapSummary, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::Invalid("gap statistics need at least two values".into()));
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(k));
    }
    if let Some(k) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(StatsError::Unsorted(k + 1));
    }
    let gaps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let (argmin, min_gap) = gaps.iter().copied().enumerate().fold((0, f64::INFINITY), |acc, (k, g)| if g < acc.1 { (k, g) } else { acc });
    let normalized_gaps: Vec<f64> = gaps.iter().map(|g| g * scale).collect();
    let dist = EmpiricalDistribution::new(normalized_gaps.clone())?;
    let quantiles = GAP_QUANTILE_LEVELS.iter().map(|&q| (q, dist.quantile(q))).collect();
    Ok(GapSummary { min_gap, argmin: argmin + 1, min_normalized_gap: min_gap * scale, normalized_gaps, quantiles })
}

/// The regularized gap: the infimum over `1 ≤ i− ≤ i0 − l < i0 ≤ i+ ≤ p` of
/// `√N0 (σ_{i+} − σ_{i−}) / min(i+ − i−, log^{c1} N0)^{log^{0.9} N0}` with
/// `N0 = p + n` and natural logarithms.
pub fn regularized_gap(sigmas: &[f64], i0: usize, l: usize, c1: f64, p: usize, n: usize) -> Result<f64, StatsError> {
    if sigmas.len() != p {
        return Err(StatsError::Invalid(format!("{} singular values for p = {p}", sigmas.len())));
    }
    if l == 0 || l >= i0 || i0 > p {
        return Err(StatsError::Index(format!("need 1 <= i0 - l < i0 <= p, got i0 = {i0}, l = {l}, p = {p}")));
    }
    let n0 = (p + n) as f64;
    let log = n0.ln();
    let cap = log.powf(c1);
    let exponent = log.powf(0.9);
    let root = n0.sqrt();
    let mut best = f64::INFINITY;
    for lo in 1..=i0 - l {
        for hi in i0..=p {
            let num = root * sigmas[hi - 1] - root * sigmas[lo - 1];
            let den = ((hi - lo) as f64).min(cap).powf(exponent);
            best = best.min(num / den);
        }
    }
    Ok(best)
}

/// `(1/n) [Σ_{j≠i} |σ_j − σ_i|^{-2} + (n − p) σ_i^{-2} + Σ_j |σ_j + σ_i|^{-2}]`.
pub fn q_index(sigmas: &[f64], i: usize, p: usize, n: usize) -> Result<f64, StatsError> {
    if sigmas.len() != p || p > n {
        return Err(StatsError::Invalid(format!("{} singular values for p = {p}, n = {n}", sigmas.len())));
    }
    if i == 0 || i > p {
        return Err(StatsError::Index(format!("i = {i} outside 1..={p}")));
    }
    let s = sigmas[i - 1];
    if !(s > 0.0) {
        return Err(StatsError::Invalid(format!("sigma_{i} = {s} must be positive")));
    }
    let mut sum = (n - p) as f64 / (s * s);
    for (j, &t) in sigmas.iter().enumerate() {
        if j + 1 != i {
            if t == s {
                return Err(StatsError::Degenerate { index: i, other: j + 1 });
            }
            sum += 1.0 / ((t - s) * (t - s));
        }
        sum += 1.0 / ((t + s) * (t + s));
    }
    Ok(sum / n as f64)
}

/// Soft-edge centering and scaling for `σ_1²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeNormalization {
    /// Center `(√n − √p)²`, scale `(√n − √p)(1/√p − 1/√n)^{1/3}`.
    #[default]
    Standard,
    /// The formula as printed: center `√p − √n`, scale
    /// `(√p − √n)(p^{-1/2} − n^{-1/2})^{1/3}`.
    Literal,
}

/// `(center, scale)` for the chosen normalization.
pub fn edge_constants(p: usize, n: usize, convention: EdgeNormalization) -> Result<(f64, f64), StatsError> {
    if p == 0 || p > n {
        return Err(StatsError::Invalid(format!("need 1 <= p <= n, got p = {p}, n = {n}")));
    }
    if p == n {
        return Err(StatsError::HardEdge(n));
    }
    let (rp, rn) = ((p as f64).sqrt(), (n as f64).sqrt());
    Ok(match convention {
        EdgeNormalization::Standard => ((rn - rp) * (rn - rp), (rn - rp) * (1.0 / rp - 1.0 / rn).cbrt()),
        EdgeNormalization::Literal => (rp - rn, (rp - rn) * (1.0 / rp - 1.0 / rn).cbrt()),
    })
}

pub fn tw_normalize(sigma_min_sq: f64, p: usize, n: usize) -> Result<f64, StatsError> {
    tw_normalize_with(sigma_min_sq, p, n, EdgeNormalization::Standard)
}

pub fn tw_normalize_with(sigma_min_sq: f64, p: usize, n: usize, convention: EdgeNormalization) -> Result<f64, StatsError> {
    let (c, s) = edge_constants(p, n, convention)?;
    Ok((sigma_min_sq - c) / s)
}

/// `sup_x |F_A(x) − F_B(x)|`, evaluated at every point of the merged sample.
pub fn ks_distance(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (x, y) = (a.values(), b.values());
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < x.len() || j < y.len() {
        // advance past every copy of the next merged value in both samples
        let v = match (x.get(i), y.get(j)) {
            (Some(&u), Some(&w)) => u.min(w),
            (Some(&u), None) => u,
            (None, Some(&w)) => w,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSummary {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    /// Entry bound used to scale `t`; `nominal_k` marks unbounded laws for
    /// which `K = 1` is substituted.
    pub k: f64,
    pub nominal_k: bool,
    /// `‖π_H X‖ − √d` per trial, in trial order.
    pub deviations: Vec<f64>,
    pub mean_norm_sq: f64,
    /// `(t, P(|‖π_H X‖ − √d| ≥ t), 10 exp(−t²/(10K²)))` for `t = K, …, 10K`.
    pub exceedance: Vec<(f64, f64, f64)>,
}

/// Almost-sure bound on `|ζ|` when the law has one.
pub fn entry_bound(spec: &DistributionSpec) -> Option<f64> {
    let max_abs = |atoms: &[crate::ensembles::Atom]| atoms.iter().map(|a| a.value.to_f64().abs()).fold(0.0, f64::max);
    match spec.kind() {
        Kind::Truncated { bound, .. } => Some(*bound),
        Kind::Rademacher => Some(1.0),
        Kind::AtomicReal { atoms } => Some(max_abs(atoms)),
        Kind::AtomicComplex { re, im } => Some(((max_abs(re).powi(2) + max_abs(im).powi(2)) / 2.0).sqrt()),
        _ => None,
    }
}

/// Orthonormal rows spanning a uniformly random `d`-dimensional subspace
/// of `F^n`, by Gram-Schmidt on Gaussian vectors drawn from the tag streams.
fn random_subspace(n: usize, d: usize, complex: bool, seed: u64) -> Vec<Vec<Complex64>> {
    use rand_distr::{Distribution, StandardNormal};
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    let mut tag = 0u64;
    while basis.len() < d {
        let mut rng = CounterRng::for_tag(seed, tag);
        tag += 1;
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = if complex { StandardNormal.sample(&mut rng) } else { 0.0 };
                Complex64::new(re, im)
            })
            .collect();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(q) {
                    *x -= c * a;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

/// Projects `trials` random vectors with i.i.d. entries onto one fixed random
/// `d`-dimensional subspace and records `‖π_H X‖ − √d`.
pub fn projection_concentration(
    spec: &DistributionSpec,
    n: usize,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<ProjectionSummary, StatsError> {
    if d == 0 || d > n {
        return Err(StatsError::Invalid(format!("need 1 <= d <= n, got d = {d}, n = {n}")));
    }
    if trials == 0 {
        return Err(StatsError::Empty);
    }
    let basis = random_subspace(n, d, spec.is_complex(), seed);
    let mut deviations = Vec::with_capacity(trials);
    let mut norm_sq_sum = 0.0;
    for t in 0..trials {
        let x = sample_entries(spec, seed, t as u64, n)?;
        let norm_sq: f64 = basis.iter().map(|q| q.iter().zip(&x).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr()).sum();
        norm_sq_sum += norm_sq;
        deviations.push(norm_sq.sqrt() - (d as f64).sqrt());
    }
    let (k, nominal_k) = match entry_bound(spec) {
        Some(k) => (k, false),
        None => (1.0, true),
    };
    let exceedance = (1..=10)
        .map(|m| {
            let t = m as f64 * k;
            let frac = deviations.iter().filter(|v| v.abs() >= t).count() as f64 / trials as f64;
            (t, frac, 10.0 * (-t * t / (10.0 * k * k)).exp())
        })
        .collect();
    Ok(ProjectionSummary { n, d, trials, k, nominal_k, deviations, mean_norm_sq: norm_sq_sum / trials as f64, exceedance })
}
