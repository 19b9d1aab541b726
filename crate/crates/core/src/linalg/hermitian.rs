use num_traits::{Float, One, Zero};

use super::{eps, LinalgError, Matrix};
use crate::scalar::{dotc, norm2, Real, Scalar};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen<F: Scalar> {
    pub values: Vec<F::Real>,
    /// Row `i` holds the unit eigenvector for `values[i]`.
    pub vectors: Matrix<F>,
}

impl<F: Scalar> HermitianEigen<F> {
    #[inline]
    pub fn vector(&self, i: usize) -> &[F] {
        self.vectors.row(i)
    }
}

/// Householder data of the reduction `A = Q T Q*`.
struct Tridiagonal<F: Scalar> {
    diag: Vec<F::Real>,
    /// `off[k]` couples `k` and `k + 1`; last entry is zero padding.
    off: Vec<F::Real>,
    reflectors: Vec<(F, Vec<F>)>,
}

fn check_square<F: Scalar>(a: &Matrix<F>) -> Result<usize, LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    Ok(a.rows())
}

/// Reduces the lower triangle of a Hermitian matrix to real symmetric
/// tridiagonal form with unblocked Householder reflectors.
fn tridiagonalize<F: Scalar>(a: &Matrix<F>, keep_reflectors: bool) -> Tridiagonal<F> {
    let n = a.rows();
    let mut w = a.clone();
    let mut diag = vec![F::Real::zero(); n];
    let mut off = vec![F::Real::zero(); n];
    let mut reflectors = Vec::new();
    let mut y = vec![F::zero(); n];
    let mut wc = vec![F::zero(); n];
    let mut vc = vec![F::zero(); n];

    for k in 0..n {
        diag[k] = w[(k, k)].re();
        if k + 1 >= n {
            break;
        }
        let m = n - k - 1;
        let mut v: Vec<F> = (k + 1..n).map(|r| w[(r, k)]).collect();
        let alpha = v[0];
        let xnorm = norm2(&v[1..]).sqrt();
        if xnorm == F::Real::zero() && alpha.im() == F::Real::zero() {
            off[k] = alpha.re();
            if keep_reflectors {
                reflectors.push((F::zero(), Vec::new()));
            }
            continue;
        }
        let mut beta = alpha.re().hypot(alpha.im()).hypot(xnorm);
        if alpha.re() >= F::Real::zero() {
            beta = -beta;
        }
        let beta_s = F::from_real(beta);
        let tau = (beta_s - alpha) / beta_s;
        let inv = F::one() / (alpha - beta_s);
        v[0] = F::one();
        for x in v[1..].iter_mut() {
            *x *= inv;
        }
        off[k] = beta;

        // y = B v on the trailing block, lower triangle only
        let y = &mut y[..m];
        y.fill(F::zero());
        for r in 0..m {
            let row = &w.row(k + 1 + r)[k + 1..k + 1 + r + 1];
            let vr = v[r];
            let mut acc = F::zero();
            for c in 0..r {
                acc += row[c] * v[c];
                y[c] += row[c].conj() * vr;
            }
            y[r] += acc + row[r] * vr;
        }
        for yi in y.iter_mut() {
            *yi = tau * *yi;
        }
        let half = F::from_real(F::Real::half());
        let corr = -(half * tau * dotc(y, &v));
        for (yi, &vi) in y.iter_mut().zip(&v) {
            *yi += corr * vi;
        }
        let wc = &mut wc[..m];
        let vc = &mut vc[..m];
        for i in 0..m {
            wc[i] = y[i].conj();
            vc[i] = v[i].conj();
        }
        // B -= v w* + w v*
        for r in 0..m {
            let (vr, wr) = (v[r], y[r]);
            let row = &mut w.row_mut(k + 1 + r)[k + 1..k + 1 + r + 1];
            for c in 0..=r {
                row[c] -= vr * wc[c] + wr * vc[c];
            }
        }
        if keep_reflectors {
            reflectors.push((tau, v));
        }
    }
    Tridiagonal { diag, off, reflectors }
}

/// Accumulates `Q = H_0 H_1 ... H_{n-2}` and returns `Q^T`, whose rows are the columns of `Q`.
fn form_q_transposed<F: Scalar>(n: usize, reflectors: &[(F, Vec<F>)]) -> Matrix<F> {
    let mut q = Matrix::<F>::identity(n);
    let mut s = vec![F::zero(); n];
    for (k, (tau, v)) in reflectors.iter().enumerate().rev() {
        if *tau == F::zero() {
            continue;
        }
        let off = k + 1;
        let m = n - off;
        let s = &mut s[..m];
        s.fill(F::zero());
        for (r, &vr) in v.iter().enumerate() {
            let row = &q.row(off + r)[off..];
            let cv = vr.conj();
            for (si, &x) in s.iter_mut().zip(row) {
                *si += cv * x;
            }
        }
        for (r, &vr) in v.iter().enumerate() {
            let f = *tau * vr;
            let row = &mut q.row_mut(off + r)[off..];
            for (x, &si) in row.iter_mut().zip(s.iter()) {
                *x -= f * si;
            }
        }
    }
    q.transpose()
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix.
///
/// `off[k]` couples `k` and `k + 1`. When `rows` is given, each plane rotation
/// is applied to the corresponding pair of rows, so on entry `rows` should
/// hold `Q^T`. Eigenvalues are left unsorted in `diag`.
pub fn tridiagonal_ql<F: Scalar>(
    diag: &mut [F::Real],
    off: &mut [F::Real],
    mut rows: Option<&mut Matrix<F>>,
) -> Result<(), LinalgError> {
    let n = diag.len();
    if n <= 1 {
        return Ok(());
    }
    let e = off;
    e[n - 1] = F::Real::zero();
    let limit = 100 * n.max(30);
    let mut total = 0usize;
    let two = F::Real::two();
    let epsilon = eps::<F::Real>();

    for l in 0..n {
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= epsilon * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > limit {
                return Err(LinalgError::NoConvergence { routine: "tridiagonal QL", limit });
            }
            let mut g = (diag[l + 1] - diag[l]) / (two * e[l]);
            let mut r = g.hypot(F::Real::one());
            let signed_r = if g >= F::Real::zero() { r.abs() } else { -r.abs() };
            g = diag[m] - diag[l] + e[l] / (g + signed_r);
            let (mut s, mut c, mut p) = (F::Real::one(), F::Real::one(), F::Real::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == F::Real::zero() {
                    diag[i + 1] -= p;
                    e[m] = F::Real::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + two * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = rows.as_deref_mut() {
                    let (zi, zi1) = z.row_pair_mut(i, i + 1);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = a.scale(s) + f.scale(c);
                        *a = a.scale(c) - f.scale(s);
                    }
                }
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = F::Real::zero();
        }
    }
    Ok(())
}

fn ascending_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    // sort_by is stable: equal values keep their original order
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

/// Eigenvalues of a Hermitian matrix (lower triangle is read), ascending.
pub fn hermitian_eigenvalues<F: Scalar>(a: &Matrix<F>) -> Result<Vec<F::Real>, LinalgError> {
    let n = check_square(a)?;
    let Tridiagonal { mut diag, mut off, .. } = tridiagonalize(a, false);
    tridiagonal_ql::<F>(&mut diag, &mut off, None)?;
    let order = ascending_order(&diag);
    debug_assert_eq!(order.len(), n);
    Ok(order.into_iter().map(|i| diag[i]).collect())
}

/// Full eigen-decomposition of a Hermitian matrix (lower triangle is read).
pub fn hermitian_eigen<F: Scalar>(a: &Matrix<F>) -> Result<HermitianEigen<F>, LinalgError> {
    let n = check_square(a)?;
    let Tridiagonal { mut diag, mut off, reflectors } = tridiagonalize(a, true);
    let mut qt = form_q_transposed(n, &reflectors);
    tridiagonal_ql(&mut diag, &mut off, Some(&mut qt))?;
    let order = ascending_order(&diag);
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.row_mut(dst).copy_from_slice(qt.row(src));
    }
    Ok(HermitianEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    fn random_hermitian(n: usize, seed: u64) -> Matrix<Complex64> {
        let mut s = seed;
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let z = if i == j {
                    Complex64::new(lcg(&mut s), 0.0)
                } else {
                    Complex64::new(lcg(&mut s), lcg(&mut s))
                };
                a[(i, j)] = z;
                a[(j, i)] = z.conj();
            }
        }
        a
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let a = Matrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 2.0]]);
        assert_eq!(hermitian_eigenvalues(&a).unwrap(), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (17, 4)] {
            let a = random_hermitian(n, seed);
            let eig = hermitian_eigen(&a).unwrap();
            for i in 0..n {
                let v = eig.vector(i);
                let av = a.matvec(v);
                let res: f64 =
                    av.iter().zip(v).map(|(x, y)| (*x - y.scale(eig.values[i])).norm_sqr()).sum::<f64>().sqrt();
                assert!(res < 1e-12, "n={n} i={i} residual {res}");
                for j in 0..n {
                    let g = dotc(eig.vector(i), eig.vector(j));
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((g - Complex64::new(expect, 0.0)).norm() < 1e-12);
                }
            }
            let only = hermitian_eigenvalues(&a).unwrap();
            for (x, y) in only.iter().zip(&eig.values) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_is_preserved() {
        let a = random_hermitian(12, 99);
        let vals = hermitian_eigenvalues(&a).unwrap();
        let trace: f64 = (0..12).map(|i| a[(i, i)].re).sum();
        assert!((vals.iter().sum::<f64>() - trace).abs() < 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        let a = Matrix::from_rows(&[vec![f64::NAN]]);
        assert_eq!(hermitian_eigenvalues(&a), Err(LinalgError::NonFinite));
    }

    #[test]
    fn f32_works() {
        let a = Matrix::from_rows(&[vec![2.0f32, 1.0], vec![1.0, 2.0]]);
        let v = hermitian_eigenvalues(&a).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-6 && (v[1] - 3.0).abs() < 1e-6);
    }
}
