//! Reproducible sampling of entries and matrices.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::CounterRng;
use super::{Atom, DistributionSpec, EnsembleError, Kind, REJECTION_LIMIT};
use crate::linalg::Matrix;

/// Inverse-CDF table of an atomic law.
#[derive(Debug, Clone)]
struct AtomTable {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl AtomTable {
    fn new(atoms: &[Atom], scale: f64) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = atoms
            .iter()
            .map(|a| {
                acc += a.prob.to_f64();
                acc
            })
            .collect();
        // probabilities sum to 1 only to 1e-12; never fall off the end
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        Self { values: atoms.iter().map(|a| a.value.to_f64() * scale).collect(), cumulative }
    }

    #[inline]
    fn draw(&self, rng: &mut CounterRng) -> f64 {
        let u = rng.uniform();
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.values[k]
    }
}

/// A spec compiled for fast repeated draws.
#[derive(Debug, Clone)]
pub enum Sampler {
    GaussianReal,
    GaussianComplex,
    Rademacher,
    Atomic(AtomTableHandle),
    AtomicComplex(AtomTableHandle, AtomTableHandle),
    Divisible { alpha: f64, beta: f64, complex: bool, base: Box<Sampler> },
    Truncated { bound: f64, base: Box<Sampler> },
}

/// Opaque inverse-CDF table.
#[derive(Debug, Clone)]
pub struct AtomTableHandle(AtomTable);

impl Sampler {
    pub fn new(spec: &DistributionSpec) -> Self {
        match spec.kind() {
            Kind::GaussianReal => Sampler::GaussianReal,
            Kind::GaussianComplex => Sampler::GaussianComplex,
            Kind::Rademacher => Sampler::Rademacher,
            Kind::AtomicReal { atoms } => Sampler::Atomic(AtomTableHandle(AtomTable::new(atoms, 1.0))),
            Kind::AtomicComplex { re, im } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Sampler::AtomicComplex(AtomTableHandle(AtomTable::new(re, s)), AtomTableHandle(AtomTable::new(im, s)))
            }
            Kind::GaussianDivisible { t, base } => Sampler::Divisible {
                alpha: (1.0 - t).sqrt(),
                beta: t.sqrt(),
                complex: spec.is_complex(),
                base: Box::new(Sampler::new(base)),
            },
            Kind::Truncated { base, bound } => Sampler::Truncated { bound: *bound, base: Box::new(Sampler::new(base)) },
        }
    }

    fn draw_untruncated(&self, rng: &mut CounterRng) -> Complex64 {
        match self {
            Sampler::GaussianReal => Complex64::new(StandardNormal.sample(rng), 0.0),
            Sampler::GaussianComplex => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(s * re, s * im)
            }
            Sampler::Rademacher => Complex64::new(if rng.next_bit() { 1.0 } else { -1.0 }, 0.0),
            Sampler::Atomic(t) => Complex64::new(t.0.draw(rng), 0.0),
            Sampler::AtomicComplex(re, im) => Complex64::new(re.0.draw(rng), im.0.draw(rng)),
            Sampler::Divisible { alpha, beta, complex, base } => {
                let x = base.draw_untruncated(rng);
                let g = if *complex {
                    Sampler::GaussianComplex.draw_untruncated(rng)
                } else {
                    Sampler::GaussianReal.draw_untruncated(rng)
                };
                x * *alpha + g * *beta
            }
            Sampler::Truncated { .. } => unreachable!("truncated laws are never nested"),
        }
    }

    /// One draw; `rejections` accumulates discarded draws of truncated laws.
    pub fn draw_counting(&self, rng: &mut CounterRng, rejections: &mut u64) -> Result<Complex64, EnsembleError> {
        match self {
            Sampler::Truncated { bound, base } => {
                for _ in 0..REJECTION_LIMIT {
                    let z = base.draw_untruncated(rng);
                    if z.norm() <= *bound {
                        return Ok(z);
                    }
                    *rejections += 1;
                }
                Err(EnsembleError::RejectionLimit(REJECTION_LIMIT))
            }
            s => Ok(s.draw_untruncated(rng)),
        }
    }

    pub fn draw(&self, rng: &mut CounterRng) -> Result<Complex64, EnsembleError> {
        let mut r = 0;
        self.draw_counting(rng, &mut r)
    }
}

impl CounterRng {
    #[inline]
    fn next_bit(&mut self) -> bool {
        use rand_core::RngCore;
        self.next_u64() >> 63 == 1
    }
}

/// Matrix entries, stored in the cheapest field that holds them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entries {
    Real(Matrix<f64>),
    Complex(Matrix<Complex64>),
}

impl Entries {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Entries::Real(m) => m.shape(),
            Entries::Complex(m) => m.shape(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Entries::Complex(_))
    }

    pub fn to_complex(&self) -> Matrix<Complex64> {
        match self {
            Entries::Real(m) => m.map(|x| Complex64::new(x, 0.0)),
            Entries::Complex(m) => m.clone(),
        }
    }
}

/// A realized `p × n` matrix with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSample {
    pub p: usize,
    pub n: usize,
    pub seed: u64,
    pub trial_index: u64,
    pub spec_id: String,
    pub entries: Entries,
}

impl MatrixSample {
    /// Wraps an explicit real matrix.
    pub fn from_real(m: Matrix<f64>) -> Self {
        let (p, n) = m.shape();
        Self { p, n, seed: 0, trial_index: 0, spec_id: "explicit".into(), entries: Entries::Real(m) }
    }

    /// Wraps an explicit complex matrix.
    pub fn from_complex(m: Matrix<Complex64>) -> Self {
        let (p, n) = m.shape();
        Self { p, n, seed: 0, trial_index: 0, spec_id: "explicit".into(), entries: Entries::Complex(m) }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.p, self.n)
    }
}

/// Draws a `p × n` matrix. Entry `(i, j)` uses the stream keyed by
/// `(seed, trial, i, j)`, so any subset of trials can be regenerated alone.
pub fn sample_matrix(
    spec: &DistributionSpec,
    p: usize,
    n: usize,
    seed: u64,
    trial: u64,
) -> Result<MatrixSample, EnsembleError> {
    if p == 0 || p > n {
        return Err(EnsembleError::Shape { p, n });
    }
    let sampler = Sampler::new(spec);
    let draw = |i: usize, j: usize| sampler.draw(&mut CounterRng::for_entry(seed, trial, i as u64, j as u64));
    let entries = if spec.is_complex() {
        let mut data = Vec::with_capacity(p * n);
        for i in 0..p {
            for j in 0..n {
                data.push(draw(i, j)?);
            }
        }
        Entries::Complex(Matrix::from_vec(p, n, data).expect("length matches"))
    } else {
        let mut data = Vec::with_capacity(p * n);
        for i in 0..p {
            for j in 0..n {
                data.push(draw(i, j)?.re);
            }
        }
        Entries::Real(Matrix::from_vec(p, n, data).expect("length matches"))
    };
    Ok(MatrixSample { p, n, seed, trial_index: trial, spec_id: spec.name(), entries })
}

/// `count` independent draws, the `j`-th from stream `(seed, trial, 0, j)`.
pub fn sample_entries(
    spec: &DistributionSpec,
    seed: u64,
    trial: u64,
    count: usize,
) -> Result<Vec<Complex64>, EnsembleError> {
    let sampler = Sampler::new(spec);
    (0..count).map(|j| sampler.draw(&mut CounterRng::for_entry(seed, trial, 0, j as u64))).collect()
}
