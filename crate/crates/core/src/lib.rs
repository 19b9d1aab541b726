//! Random-matrix numerics for rectangular sample covariance matrices.
//!
//! Entry laws and reproducible sampling live in [`ensembles`], decompositions
//! and identity checks in [`spectra`], the Marchenko-Pastur law in
//! [`mp_law`], spectral statistics in [`stats`] and Monte Carlo experiments
//! in [`harness`]. Dense linear algebra is generic over [`scalar::Scalar`]
//! (`f32`, `f64`, [`scalar::DoubleDouble`] and their complex counterparts).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensembles;
pub mod harness;
pub mod linalg;
pub mod mp_law;
pub mod quadrature;
pub mod scalar;
pub mod spectra;
pub mod stats;

pub use num_complex::{Complex32, Complex64};

pub type RealMatrix = linalg::Matrix<f64>;
pub type ComplexMatrix = linalg::Matrix<Complex64>;
pub type RealMatrix32 = linalg::Matrix<f32>;
pub type ComplexMatrix32 = linalg::Matrix<Complex32>;

pub type RealDecomposition = spectra::SpectralDecomposition<f64>;
pub type ComplexDecomposition = spectra::SpectralDecomposition<Complex64>;
pub type RealDecomposition32 = spectra::SpectralDecomposition<f32>;
pub type ComplexDecomposition32 = spectra::SpectralDecomposition<Complex32>;

pub type MpLaw = mp_law::MpModel<f64>;
pub type MpLaw32 = mp_law::MpModel<f32>;

/// Exact quadratic-surd values used for atoms and moments.
pub type Exact = ensembles::Surd;

pub use ensembles::{DistributionSpec, MatrixSample};
pub use harness::ExperimentConfig;
pub use spectra::{Decomposition, SpectralDecomposition};
pub use stats::EmpiricalDistribution;
