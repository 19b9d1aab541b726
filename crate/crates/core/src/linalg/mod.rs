//! Dense linear algebra over [`Scalar`] fields.
//!
//! Only what the spectral code needs: a row-major matrix, Gram products, a
//! Hermitian eigensolver (Householder tridiagonalization followed by implicit
//! QL) and a one-sided Jacobi SVD.

mod hermitian;
mod svd;

pub use hermitian::{hermitian_eigen, hermitian_eigenvalues, tridiagonal_ql, HermitianEigen};
pub use svd::{jacobi_svd, Svd};

use std::ops::{Index, IndexMut};

use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{dotc, norm2, Real, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{routine} did not converge within {limit} iterations")]
    NoConvergence { routine: &'static str, limit: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.concat() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Mutable access to two distinct rows.
    pub fn row_pair_mut(&mut self, i: usize, j: usize) -> (&mut [F], &mut [F]) {
        assert!(i != j);
        let c = self.cols;
        if i < j {
            let (lo, hi) = self.data.split_at_mut(j * c);
            (&mut lo[i * c..(i + 1) * c], &mut hi[..c])
        } else {
            let (lo, hi) = self.data.split_at_mut(i * c);
            (&mut hi[..c], &mut lo[j * c..(j + 1) * c])
        }
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, s: F) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::Shape(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::Shape(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a != F::zero() {
                    crate::scalar::axpy(a, other.row(k), out_row);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(F::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `A* x`
    pub fn adjoint_matvec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![F::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    /// `A A*`, Hermitian, exploiting contiguous rows.
    pub fn gram_rows(&self) -> Self {
        let p = self.rows;
        let mut g = Self::zeros(p, p);
        for i in 0..p {
            for j in 0..=i {
                // (A A*)_{ij} = Σ_k A_ik conj(A_jk)
                let v = dotc(self.row(j), self.row(i));
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }

    pub fn frobenius_norm(&self) -> F::Real {
        norm2(&self.data).sqrt()
    }

    /// Removes row `r`.
    pub fn without_row(&self, r: usize) -> Self {
        let mut data = Vec::with_capacity((self.rows - 1) * self.cols);
        for i in (0..self.rows).filter(|&i| i != r) {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: self.rows - 1, cols: self.cols, data }
    }

    /// Removes column `c`.
    pub fn without_col(&self, c: usize) -> Self {
        Self::from_fn(self.rows, self.cols - 1, |i, j| self[(i, if j < c { j } else { j + 1 })])
    }

    /// Removes row and column `k` of a square matrix.
    pub fn principal_minor(&self, k: usize) -> Self {
        self.without_row(k).without_col(k)
    }

    pub fn map<G: Scalar>(&self, f: impl Fn(F) -> G) -> Matrix<G> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

/// Largest singular value.
pub fn operator_norm<F: Scalar>(m: &Matrix<F>) -> Result<F::Real, LinalgError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(F::Real::zero());
    }
    let g = if m.rows() <= m.cols() { m.gram_rows() } else { m.adjoint().gram_rows() };
    let vals = hermitian_eigenvalues(&g)?;
    let top = vals.last().copied().unwrap_or_else(F::Real::zero);
    Ok(top.max(F::Real::zero()).sqrt())
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve<F: Scalar>(a: &Matrix<F>, b: &[F]) -> Result<Vec<F>, LinalgError> {
    let n = a.rows();
    if a.cols() != n {
        return Err(LinalgError::NotSquare { rows: n, cols: a.cols() });
    }
    if b.len() != n {
        return Err(LinalgError::Shape(format!("rhs of length {} for {n}x{n} system", b.len())));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[(i, col)].abs2().partial_cmp(&m[(j, col)].abs2()).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[(pivot, col)].abs2() == F::Real::zero() {
            return Err(LinalgError::Shape("singular system".into()));
        }
        if pivot != col {
            for j in 0..n {
                let t = m[(col, j)];
                m[(col, j)] = m[(pivot, j)];
                m[(pivot, j)] = t;
            }
            x.swap(col, pivot);
        }
        let d = m[(col, col)];
        for i in col + 1..n {
            let f = m[(i, col)] / d;
            if f == F::zero() {
                continue;
            }
            for j in col..n {
                let t = m[(col, j)];
                m[(i, j)] -= f * t;
            }
            let t = x[col];
            x[i] -= f * t;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    Ok(x)
}

/// Unit roundoff of the real type as a generic helper.
#[inline]
pub(crate) fn eps<T: Real>() -> T {
    T::unit_roundoff()
}
