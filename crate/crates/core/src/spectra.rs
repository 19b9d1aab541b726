//! Singular value decompositions, covariance spectra and numerical checks of
//! the exact interlacing and resolvent identities.
//!
//! Conventions: `M` is `p × n` with `p ≤ n`, `σ_1 ≤ … ≤ σ_p` ascending,
//! `M u_i = σ_i v_i` with right vectors `u_i ∈ F^n` and left vectors
//! `v_i ∈ F^p`, and `λ_i = σ_i² / n` are the nontrivial eigenvalues of
//! `W = M*M / n`. Indices taken by the verifiers are 1-based like `σ_i`.

use num_complex::{Complex, Complex64};
use num_traits::{Float, One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ensembles::{Entries, MatrixSample};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, jacobi_svd, operator_norm, solve, LinalgError, Matrix};
use crate::scalar::{dotc, norm2, Real, Scalar, DoubleDouble};

/// Required gap between `σ_i(M)` and every singular value of the minor
/// before the coordinate formula and interlacing identities are evaluated
/// in `f64`; wider types demand proportionally less.
pub const SEPARATION_TOL: f64 = 1e-8;
/// Required distance between `z` and the spectra in the Schur check.
pub const SPECTRUM_DISTANCE_TOL: f64 = 1e-6;
/// Interlacing inequalities are counted as violated beyond this slack.
pub const INTERLACING_TOL: f64 = 1e-9;
/// Slack added to the Weyl bound.
pub const WEYL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error("index {index} out of range 1..={max}")]
    Index { index: usize, max: usize },
    #[error("singular value {index} of the minor is within {gap:e} of sigma_{target}")]
    Degenerate { index: usize, target: usize, gap: f64 },
    #[error("z lies within {distance:e} of the spectrum of {matrix}")]
    NearSpectrum { matrix: String, distance: f64 },
}

/// Thin SVD of a `p × n` matrix with `p ≤ n`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralDecomposition<F: Scalar> {
    pub p: usize,
    pub n: usize,
    /// Ascending, ties in the order produced by the solver.
    pub sigma: Vec<F::Real>,
    /// `λ_i = σ_i² / n`.
    pub lambda: Vec<F::Real>,
    /// Row `i` is `u_i ∈ F^n`.
    pub right: Matrix<F>,
    /// Row `i` is `v_i ∈ F^p`.
    pub left: Matrix<F>,
    /// `max_i ‖M u_i − σ_i v_i‖`.
    pub residual_norm: F::Real,
}

impl<F: Scalar> SpectralDecomposition<F> {
    pub fn right_vector(&self, i: usize) -> &[F] {
        self.right.row(i)
    }

    pub fn left_vector(&self, i: usize) -> &[F] {
        self.left.row(i)
    }

    /// `Σ_i σ_i v_i u_i*`.
    pub fn reconstruct(&self) -> Matrix<F> {
        let mut m = Matrix::zeros(self.p, self.n);
        for (k, &s) in self.sigma.iter().enumerate() {
            let (u, v) = (self.right.row(k), self.left.row(k));
            for (i, &vi) in v.iter().enumerate() {
                let vi = vi.scale(s);
                for (x, &uj) in m.row_mut(i).iter_mut().zip(u) {
                    *x += vi * uj.conj();
                }
            }
        }
        m
    }
}

/// Singular values with both vector systems, for either orientation; the
/// length is `min(rows, cols)`.
struct ThinSvd<F: Scalar> {
    sigma: Vec<F::Real>,
    /// Rows in `F^cols`.
    right: Matrix<F>,
    /// Rows in `F^rows`.
    left: Matrix<F>,
}

fn thin_svd<F: Scalar>(m: &Matrix<F>) -> Result<ThinSvd<F>, LinalgError> {
    if m.rows() <= m.cols() {
        let eig = hermitian_eigen(&m.gram_rows())?;
        let start = eig.vectors.map(|x| x.conj());
        let svd = jacobi_svd(m, Some(&start))?;
        Ok(ThinSvd { sigma: svd.sigma, right: svd.right, left: svd.left })
    } else {
        // M* = Σ σ v u*  ⇒  M = Σ σ u v*
        let t = thin_svd(&m.adjoint())?;
        Ok(ThinSvd { sigma: t.sigma, right: t.left, left: t.right })
    }
}

fn check_wide<F: Scalar>(m: &Matrix<F>) -> Result<(usize, usize), SpectraError> {
    let (p, n) = m.shape();
    if p == 0 || p > n {
        return Err(SpectraError::Shape(format!("expected 1 <= p <= n, got {p}x{n}")));
    }
    Ok((p, n))
}

/// Full thin decomposition of `m`.
pub fn decompose_matrix<F: Scalar>(m: &Matrix<F>) -> Result<SpectralDecomposition<F>, SpectraError> {
    let (p, n) = check_wide(m)?;
    if !m.is_finite() {
        return Err(LinalgError::NonFinite.into());
    }
    let svd = thin_svd(m)?;
    let nf = F::Real::from_usize_lossy(n);
    let lambda = svd.sigma.iter().map(|&s| s * s / nf).collect();
    let mut residual = F::Real::zero();
    for i in 0..p {
        let mu = m.matvec(svd.right.row(i));
        let r: F::Real = mu.iter().zip(svd.left.row(i)).map(|(&a, &b)| (a - b.scale(svd.sigma[i])).abs2()).fold(F::Real::zero(), |a, b| a + b);
        residual = residual.max(r.sqrt());
    }
    Ok(SpectralDecomposition { p, n, sigma: svd.sigma, lambda, right: svd.right, left: svd.left, residual_norm: residual })
}

/// Whether trivial zero eigenvalues of the `n × n` matrix `W` are included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroConvention {
    /// The `p` nontrivial eigenvalues (the ESD convention).
    #[default]
    Nontrivial,
    /// All `n` eigenvalues of `W`, with `n − p` zeros prepended.
    WithZeros,
}

/// The `p` eigenvalues of `M M* / n`, ascending and clamped at zero.
pub fn covariance_spectrum_matrix<F: Scalar>(m: &Matrix<F>) -> Result<Vec<F::Real>, SpectraError> {
    let (_, n) = check_wide(m)?;
    if !m.is_finite() {
        return Err(LinalgError::NonFinite.into());
    }
    let nf = F::Real::from_usize_lossy(n);
    let vals = hermitian_eigenvalues(&m.gram_rows())?;
    Ok(vals.into_iter().map(|x| (x / nf).max(F::Real::zero())).collect())
}

/// Dispatches over the real and complex storage of a sample.
macro_rules! with_entries {
    ($sample:expr, |$m:ident| $body:expr) => {
        match &$sample.entries {
            Entries::Real($m) => $body,
            Entries::Complex($m) => $body,
        }
    };
}

/// [`SpectralDecomposition`] in the field of the sample.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Decomposition {
    Real(SpectralDecomposition<f64>),
    Complex(SpectralDecomposition<Complex64>),
}

impl Decomposition {
    pub fn sigma(&self) -> &[f64] {
        match self {
            Decomposition::Real(d) => &d.sigma,
            Decomposition::Complex(d) => &d.sigma,
        }
    }

    pub fn lambda(&self) -> &[f64] {
        match self {
            Decomposition::Real(d) => &d.lambda,
            Decomposition::Complex(d) => &d.lambda,
        }
    }

    pub fn residual_norm(&self) -> f64 {
        match self {
            Decomposition::Real(d) => d.residual_norm,
            Decomposition::Complex(d) => d.residual_norm,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Decomposition::Real(d) => (d.p, d.n),
            Decomposition::Complex(d) => (d.p, d.n),
        }
    }

    /// Largest modulus over every coordinate of every left and right vector.
    pub fn max_coefficient(&self) -> f64 {
        fn go<F: Scalar<Real = f64>>(d: &SpectralDecomposition<F>) -> f64 {
            d.right.as_slice().iter().chain(d.left.as_slice()).fold(0.0, |acc, x| acc.max(x.modulus()))
        }
        match self {
            Decomposition::Real(d) => go(d),
            Decomposition::Complex(d) => go(d),
        }
    }
}

pub fn decompose(sample: &MatrixSample) -> Result<Decomposition, SpectraError> {
    Ok(match &sample.entries {
        Entries::Real(m) => Decomposition::Real(decompose_matrix(m)?),
        Entries::Complex(m) => Decomposition::Complex(decompose_matrix(m)?),
    })
}

/// Nontrivial eigenvalues of `W`, via the `p × p` Gram matrix.
pub fn covariance_spectrum(sample: &MatrixSample) -> Result<Vec<f64>, SpectraError> {
    with_entries!(sample, |m| covariance_spectrum_matrix(m))
}

pub fn covariance_spectrum_with(sample: &MatrixSample, convention: ZeroConvention) -> Result<Vec<f64>, SpectraError> {
    let mut vals = covariance_spectrum(sample)?;
    if convention == ZeroConvention::WithZeros {
        let mut all = vec![0.0; sample.n - sample.p];
        all.append(&mut vals);
        vals = all;
    }
    Ok(vals)
}

/// The Hermitian block matrix `[[0, M*], [M, 0]]` of order `p + n`.
#[derive(Debug, Clone, Serialize)]
pub struct AugmentedMatrix {
    pub dimension: usize,
    pub entries: Entries,
}

fn augment<F: Scalar>(m: &Matrix<F>) -> Matrix<F> {
    let (p, n) = m.shape();
    let mut a = Matrix::zeros(p + n, p + n);
    for i in 0..p {
        for j in 0..n {
            // lower-left block M, upper-right block M*
            a[(n + i, j)] = m[(i, j)];
            a[(j, n + i)] = m[(i, j)].conj();
        }
    }
    a
}

pub fn augmented(sample: &MatrixSample) -> AugmentedMatrix {
    let entries = match &sample.entries {
        Entries::Real(m) => Entries::Real(augment(m)),
        Entries::Complex(m) => Entries::Complex(augment(m)),
    };
    AugmentedMatrix { dimension: sample.p + sample.n, entries }
}

impl AugmentedMatrix {
    pub fn eigenvalues(&self) -> Result<Vec<f64>, SpectraError> {
        Ok(match &self.entries {
            Entries::Real(m) => hermitian_eigenvalues(m)?,
            Entries::Complex(m) => hermitian_eigenvalues(m)?,
        })
    }
}

/// Singular values of any shape, ascending, length `min(rows, cols)`. Taken
/// from the Jacobi SVD rather than Gram eigenvalues so that tiny singular
/// values keep absolute accuracy `eps·‖M‖` instead of `sqrt(eps)·‖M‖`.
fn singular_values<F: Scalar>(m: &Matrix<F>) -> Result<Vec<f64>, LinalgError> {
    Ok(thin_svd(m)?.sigma.into_iter().map(|x| x.to_f64_lossy()).collect())
}

/// Worst slack over one family of interlacing inequalities. Positive
/// `max_violation` means some inequality fails by that much.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct InterlacingCase {
    pub minors_checked: usize,
    pub inequalities_checked: usize,
    pub max_violation: f64,
    /// Inequalities failing by more than [`INTERLACING_TOL`].
    pub violations: usize,
}

impl InterlacingCase {
    fn record(&mut self, lower: f64, upper: f64) {
        let v = lower - upper;
        if self.inequalities_checked == 0 || v > self.max_violation {
            self.max_violation = v;
        }
        self.inequalities_checked += 1;
        if v > INTERLACING_TOL {
            self.violations += 1;
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InterlacingReport {
    /// `σ_i(M) ≤ σ_i(M_{p−1,n}) ≤ σ_{i+1}(M)` over every deleted row.
    pub row_minor: InterlacingCase,
    /// `σ_{i−1}(M) ≤ σ_i(M_{p,n−1}) ≤ σ_i(M)` (with `σ_0 = 0`) over every
    /// deleted column; for `p = n` the transposed row inequalities.
    pub column_minor: InterlacingCase,
}

impl InterlacingReport {
    pub fn max_violation(&self) -> f64 {
        self.row_minor.max_violation.max(self.column_minor.max_violation)
    }

    pub fn holds(&self) -> bool {
        self.row_minor.violations == 0 && self.column_minor.violations == 0
    }
}

pub fn verify_interlacing_law_matrix<F: Scalar>(m: &Matrix<F>) -> Result<InterlacingReport, SpectraError> {
    let (p, n) = check_wide(m)?;
    if p < 2 {
        return Err(SpectraError::Shape("interlacing needs p >= 2".into()));
    }
    let s = singular_values(m)?;
    let mut rows = InterlacingCase::default();
    for r in 0..p {
        let t = singular_values(&m.without_row(r))?;
        rows.minors_checked += 1;
        for i in 0..p - 1 {
            rows.record(s[i], t[i]);
            rows.record(t[i], s[i + 1]);
        }
    }
    let mut cols = InterlacingCase::default();
    for c in 0..n {
        let t = singular_values(&m.without_col(c))?;
        cols.minors_checked += 1;
        if p < n {
            for i in 0..p {
                let below = if i == 0 { 0.0 } else { s[i - 1] };
                cols.record(below, t[i]);
                cols.record(t[i], s[i]);
            }
        } else {
            // square: a column of M is a row of M^T
            for i in 0..p - 1 {
                cols.record(s[i], t[i]);
                cols.record(t[i], s[i + 1]);
            }
        }
    }
    Ok(InterlacingReport { row_minor: rows, column_minor: cols })
}

pub fn verify_interlacing_law(sample: &MatrixSample) -> Result<InterlacingReport, SpectraError> {
    with_entries!(sample, |m| verify_interlacing_law_matrix(m))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct WeylReport {
    /// `‖M − N‖_op`.
    pub operator_norm: f64,
    /// `max_i |σ_i(M) − σ_i(N)|`.
    pub max_shift: f64,
    /// `max_shift − operator_norm`; nonpositive when the inequality holds.
    pub max_violation: f64,
    pub holds: bool,
}

pub fn verify_weyl_matrix<F: Scalar>(m: &Matrix<F>, other: &Matrix<F>) -> Result<WeylReport, SpectraError> {
    if m.shape() != other.shape() {
        return Err(SpectraError::Shape(format!("{:?} vs {:?}", m.shape(), other.shape())));
    }
    check_wide(m)?;
    let a = singular_values(m)?;
    let b = singular_values(other)?;
    let op = operator_norm(&m.sub(other)?)?.to_f64_lossy();
    let max_shift = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(WeylReport { operator_norm: op, max_shift, max_violation: max_shift - op, holds: max_shift <= op + WEYL_TOL })
}

pub fn verify_weyl(m: &MatrixSample, other: &MatrixSample) -> Result<WeylReport, SpectraError> {
    match (&m.entries, &other.entries) {
        (Entries::Real(a), Entries::Real(b)) => verify_weyl_matrix(a, b),
        _ => verify_weyl_matrix(&m.entries.to_complex(), &other.entries.to_complex()),
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CoordinateReport {
    /// 1-based index of the singular value.
    pub index: usize,
    /// `|x|²` from the formula and from the decomposition, `x` the last
    /// coordinate of `u_i`.
    pub right_formula: f64,
    pub right_direct: f64,
    /// The same for `y`, the last coordinate of `v_i`.
    pub left_formula: f64,
    pub left_direct: f64,
    /// Largest of the two absolute differences.
    pub residual: f64,
    /// Smallest `|σ_j(minor) − σ_i|` met.
    pub min_separation: f64,
    /// Whether the reported values come from the double-double re-evaluation.
    pub extended_precision: bool,
}

/// Sample-level checks whose closest minor singular value lies nearer than
/// this to `σ_i` in `f64` are re-evaluated in double-double arithmetic.
pub const REFINE_GAP: f64 = 1e-4;

/// [`SEPARATION_TOL`] at `f64` precision, scaled with the unit roundoff for
/// wider types.
fn separation_tol<R: Real>() -> f64 {
    let u = R::unit_roundoff().to_f64_lossy();
    if u < f64::EPSILON {
        SEPARATION_TOL * u / f64::EPSILON
    } else {
        SEPARATION_TOL
    }
}

fn check_index(i: usize, p: usize) -> Result<usize, SpectraError> {
    if i == 0 || i > p {
        return Err(SpectraError::Index { index: i, max: p });
    }
    Ok(i - 1)
}

/// Smallest gap between `target` and the minor's singular values, or an
/// error if it is below the separation demanded at this precision.
fn check_separation<R: Real>(minor_sigma: &[R], target: R, target_index: usize) -> Result<f64, SpectraError> {
    let tol = separation_tol::<R>();
    let mut closest = f64::INFINITY;
    for (j, &s) in minor_sigma.iter().enumerate() {
        let gap = (s - target).abs().to_f64_lossy();
        if gap < tol {
            return Err(SpectraError::Degenerate { index: j + 1, target: target_index, gap });
        }
        closest = closest.min(gap);
    }
    Ok(closest)
}

fn lift_real(m: &Matrix<f64>) -> Matrix<DoubleDouble> {
    m.map(DoubleDouble::new)
}

fn lift_complex(m: &Matrix<Complex64>) -> Matrix<Complex<DoubleDouble>> {
    m.map(|z| Complex::new(DoubleDouble::new(z.re), DoubleDouble::new(z.im)))
}

/// Runs `$body` in `f64`, and again in double-double when the `f64` pass hit
/// a separation below [`REFINE_GAP`] or refused a collision.
macro_rules! refine_near_collision {
    ($sample:expr, |$m:ident| $body:expr) => {{
        let first = match &$sample.entries {
            Entries::Real($m) => $body,
            Entries::Complex($m) => $body,
        };
        match first {
            Ok(r) if r.min_separation >= REFINE_GAP => Ok(r),
            Ok(_) | Err(SpectraError::Degenerate { .. }) => {
                let refined = match &$sample.entries {
                    Entries::Real(a) => {
                        let $m = &lift_real(a);
                        $body
                    }
                    Entries::Complex(a) => {
                        let $m = &lift_complex(a);
                        $body
                    }
                };
                refined.map(|mut r| {
                    r.extended_precision = true;
                    r
                })
            }
            Err(e) => Err(e),
        }
    }};
}

/// `1 / (1 + Σ_j σ_j² |w_j* X|² / (σ_j² − σ²)²)`.
fn coordinate_formula<F: Scalar>(minor: &ThinSvd<F>, x: &[F], sigma: F::Real) -> F::Real {
    let mut sum = F::Real::zero();
    for (j, &sj) in minor.sigma.iter().enumerate() {
        let proj = dotc(minor_vector(minor, j, x.len()), x).abs2();
        let d = (sj - sigma) * (sj + sigma);
        sum += sj * sj * proj / (d * d);
    }
    F::Real::one() / (F::Real::one() + sum)
}

/// The minor's singular vector living in the same space as `X` (length `len`).
fn minor_vector<F: Scalar>(minor: &ThinSvd<F>, j: usize, len: usize) -> &[F] {
    if minor.left.cols() == len {
        minor.left.row(j)
    } else {
        minor.right.row(j)
    }
}

pub fn verify_coordinate_formula_matrix<F: Scalar>(m: &Matrix<F>, i: usize) -> Result<CoordinateReport, SpectraError> {
    let (p, n) = check_wide(m)?;
    let k = check_index(i, p)?;
    if n < 2 {
        return Err(SpectraError::Shape("coordinate formula needs n >= 2".into()));
    }
    let d = decompose_matrix(m)?;
    let sigma = d.sigma[k];

    // column split M = (M_{p,n−1}  X)
    let col_minor = thin_svd(&m.without_col(n - 1))?;
    let mut min_separation = check_separation(&col_minor.sigma, sigma, i)?;
    let x_col = m.column(n - 1);
    let right_formula = coordinate_formula(&col_minor, &x_col, sigma);
    let right_direct = d.right.row(k)[n - 1].abs2();

    // row split M = (M_{p−1,n} ; Y*), so Y is the conjugated last row
    let (left_formula, left_direct) = if p >= 2 {
        let row_minor = thin_svd(&m.without_row(p - 1))?;
        min_separation = min_separation.min(check_separation(&row_minor.sigma, sigma, i)?);
        let y: Vec<F> = m.row(p - 1).iter().map(|v| v.conj()).collect();
        (coordinate_formula(&row_minor, &y, sigma), d.left.row(k)[p - 1].abs2())
    } else {
        // p = 1: the empty sum gives |y|² = 1
        (F::Real::one(), d.left.row(k)[0].abs2())
    };
    let residual = (right_formula - right_direct).abs().max((left_formula - left_direct).abs());
    Ok(CoordinateReport {
        index: i,
        right_formula: right_formula.to_f64_lossy(),
        right_direct: right_direct.to_f64_lossy(),
        left_formula: left_formula.to_f64_lossy(),
        left_direct: left_direct.to_f64_lossy(),
        residual: residual.to_f64_lossy(),
        min_separation,
        extended_precision: false,
    })
}

/// [`verify_coordinate_formula_matrix`] on the sample, re-evaluated in
/// double-double near a collision.
pub fn verify_coordinate_formula(sample: &MatrixSample, i: usize) -> Result<CoordinateReport, SpectraError> {
    refine_near_collision!(sample, |m| verify_coordinate_formula_matrix(m, i))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct IdentityReport {
    /// Worst relative residual of `Σ σ_j²|v_j*X|²/(σ_j² − σ_i²) = ‖X‖² − σ_i²`
    /// (column split).
    pub column_split: f64,
    /// The same with `u_j*Y` (row split).
    pub row_split: f64,
    /// Worst relative residual of `Σ |u_j(A_{n−1})*X|²/(λ_j(A_{n−1}) − λ_i) = a_nn − λ_i`
    /// on `W = M*M/n`, over its nontrivial eigenvalues.
    pub hermitian: f64,
    /// Smallest `|σ_j(minor) − σ_i|` over both splits and all `i`.
    pub min_separation: f64,
    /// Whether the reported values come from the double-double re-evaluation.
    pub extended_precision: bool,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.column_split.max(self.row_split).max(self.hermitian)
    }
}

/// `|lhs − rhs|` relative to the largest magnitude involved, so that large
/// cancelling terms near a collision do not inflate the residual.
fn relative<R: Real>(terms: &[R], rhs_parts: &[R]) -> f64 {
    let sum = |xs: &[R]| xs.iter().fold(R::zero(), |a, &b| a + b);
    let scale = terms
        .iter()
        .chain(rhs_parts)
        .fold(R::zero(), |a, &t| a + t.abs())
        .max(R::min_positive_value());
    ((sum(terms) - sum(rhs_parts)).abs() / scale).to_f64_lossy()
}

fn split_identity<F: Scalar>(minor: &ThinSvd<F>, x: &[F], sigma: F::Real) -> f64 {
    let terms: Vec<F::Real> = minor
        .sigma
        .iter()
        .enumerate()
        .map(|(j, &sj)| {
            let proj = dotc(minor_vector(minor, j, x.len()), x).abs2();
            sj * sj * proj / ((sj - sigma) * (sj + sigma))
        })
        .collect();
    relative(&terms, &[norm2(x), -sigma * sigma])
}

pub fn verify_interlacing_identity_matrix<F: Scalar>(m: &Matrix<F>) -> Result<IdentityReport, SpectraError> {
    let (p, n) = check_wide(m)?;
    if n < 2 {
        return Err(SpectraError::Shape("interlacing identities need n >= 2".into()));
    }
    let sigma = thin_svd(m)?.sigma;
    let col_minor = thin_svd(&m.without_col(n - 1))?;
    let x = m.column(n - 1);
    let row_minor = if p >= 2 { Some(thin_svd(&m.without_row(p - 1))?) } else { None };
    let y: Vec<F> = m.row(p - 1).iter().map(|v| v.conj()).collect();

    let mut report =
        IdentityReport { column_split: 0.0, row_split: 0.0, hermitian: 0.0, min_separation: f64::INFINITY, extended_precision: false };
    for (k, &s) in sigma.iter().enumerate() {
        let gap = check_separation(&col_minor.sigma, s, k + 1)?;
        report.min_separation = report.min_separation.min(gap);
        report.column_split = report.column_split.max(split_identity(&col_minor, &x, s));
        match &row_minor {
            Some(rm) => {
                let gap = check_separation(&rm.sigma, s, k + 1)?;
                report.min_separation = report.min_separation.min(gap);
                report.row_split = report.row_split.max(split_identity(rm, &y, s));
            }
            // p = 1: the sum is empty and the identity reads σ_1² = ‖Y‖²
            None => report.row_split = report.row_split.max(relative(&[], &[norm2(&y), -s * s])),
        }
    }
    report.hermitian = hermitian_identity(m, &sigma)?;
    Ok(report)
}

/// The Hermitian interlacing identity on `A_n = W = M*M/n`, split off its
/// last row and column, at each nontrivial eigenvalue `λ_i = σ_i²/n`.
fn hermitian_identity<F: Scalar>(m: &Matrix<F>, sigma: &[F::Real]) -> Result<f64, SpectraError> {
    let n = m.cols();
    let nf = F::Real::from_usize_lossy(n);
    let w = m.adjoint().gram_rows().map(|x| x.scale(F::Real::one() / nf));
    let minor = w.principal_minor(n - 1);
    let eig = hermitian_eigen(&minor)?;
    let x: Vec<F> = (0..n - 1).map(|r| w[(r, n - 1)]).collect();
    let a_nn = w[(n - 1, n - 1)].re();
    let mut worst: f64 = 0.0;
    for &s in sigma {
        let lam = s * s / nf;
        let terms: Vec<F::Real> = eig
            .values
            .iter()
            .enumerate()
            .map(|(j, &lj)| dotc(eig.vector(j), &x).abs2() / (lj - lam))
            .collect();
        worst = worst.max(relative(&terms, &[a_nn, -lam]));
    }
    Ok(worst)
}

/// [`verify_interlacing_identity_matrix`] on the sample, re-evaluated in
/// double-double near a collision.
pub fn verify_interlacing_identity(sample: &MatrixSample) -> Result<IdentityReport, SpectraError> {
    refine_near_collision!(sample, |m| verify_interlacing_identity_matrix(m))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SchurReport {
    /// `(1/p) Σ_i 1/(λ_i − z)`.
    pub eigenvalue_side: Complex64,
    /// `(1/p) Σ_k 1/(h_kk − z − a_k*(H_k − z)^{-1} a_k)`.
    pub schur_side: Complex64,
    pub residual: f64,
}

/// Both sides of the Schur-complement formula for the Stieltjes transform of
/// a Hermitian `h` (lower triangle read) at `z`.
pub fn verify_schur_stieltjes<F: Scalar>(h: &Matrix<F>, z: Complex64) -> Result<SchurReport, SpectraError> {
    let p = h.rows();
    if p == 0 || h.cols() != p {
        return Err(SpectraError::Shape(format!("expected a nonempty square matrix, got {:?}", h.shape())));
    }
    let hc: Matrix<Complex64> = h.map(|x| Complex64::new(x.re().to_f64_lossy(), x.im().to_f64_lossy()));
    let distance = |vals: &[f64]| vals.iter().map(|&l| (Complex64::new(l, 0.0) - z).norm()).fold(f64::INFINITY, f64::min);
    let vals = hermitian_eigenvalues(&hc)?;
    let d = distance(&vals);
    if d < SPECTRUM_DISTANCE_TOL {
        return Err(SpectraError::NearSpectrum { matrix: "H".into(), distance: d });
    }
    let pf = p as f64;
    let eigenvalue_side: Complex64 = vals.iter().map(|&l| Complex64::new(1.0, 0.0) / (l - z)).sum::<Complex64>() / pf;
    let mut schur_side = Complex64::zero();
    for k in 0..p {
        let hk = hc.principal_minor(k);
        let a: Vec<Complex64> = (0..p).filter(|&r| r != k).map(|r| hc[(r, k)]).collect();
        let quad = if p > 1 {
            let mv = hermitian_eigenvalues(&hk)?;
            let dk = distance(&mv);
            if dk < SPECTRUM_DISTANCE_TOL {
                return Err(SpectraError::NearSpectrum { matrix: format!("H_{}", k + 1), distance: dk });
            }
            let mut shifted = hk.clone();
            for r in 0..p - 1 {
                shifted[(r, r)] -= z;
            }
            let sol = solve(&shifted, &a)?;
            dotc(&a, &sol)
        } else {
            Complex64::zero()
        };
        schur_side += Complex64::new(1.0, 0.0) / (hc[(k, k)] - z - quad);
    }
    schur_side /= pf;
    Ok(SchurReport { eigenvalue_side, schur_side, residual: (eigenvalue_side - schur_side).norm() })
}
