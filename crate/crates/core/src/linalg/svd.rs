use num_traits::{Float, One, Zero};

use super::{eps, LinalgError, Matrix};
use crate::scalar::{dotc, norm2, Real, Scalar};

/// Thin SVD `M = Σ_i σ_i v_i u_i*` of a `p × n` matrix with `p ≤ n`.
#[derive(Debug, Clone)]
pub struct Svd<F: Scalar> {
    /// Ascending; ties keep the row order of the final Jacobi iterate.
    pub sigma: Vec<F::Real>,
    /// Row `i` is the right singular vector `u_i ∈ F^n`.
    pub right: Matrix<F>,
    /// Row `i` is the left singular vector `v_i ∈ F^p`.
    pub left: Matrix<F>,
    pub sweeps: usize,
}

/// One-sided (Hestenes) Jacobi SVD acting on the rows of `m`.
///
/// Plane rotations `J` are applied from the left until the rows of `J M` are
/// mutually orthogonal to relative precision `n·ε`; then `M = J* (J M)`.
/// `start`, when given, must be a unitary `p × p` matrix used as the initial
/// `J`; rows of eigenvectors of `M M*` make a good start and usually leave a
/// single cleanup sweep.
pub fn jacobi_svd<F: Scalar>(m: &Matrix<F>, start: Option<&Matrix<F>>) -> Result<Svd<F>, LinalgError> {
    let (p, n) = m.shape();
    if p > n {
        return Err(LinalgError::Shape(format!("jacobi_svd expects rows <= cols, got {p}x{n}")));
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let (mut a, mut j) = match start {
        Some(j0) => {
            if j0.shape() != (p, p) {
                return Err(LinalgError::Shape("starting rotation must be p x p".into()));
            }
            (j0.matmul(m)?, j0.clone())
        }
        None => (m.clone(), Matrix::identity(p)),
    };
    let tol = eps::<F::Real>() * F::Real::from_usize_lossy(n.max(1));
    let limit = 100 * p.max(1);
    let one = F::Real::one();
    let two = F::Real::two();
    let mut norms: Vec<F::Real> = (0..p).map(|i| norm2(a.row(i))).collect();
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for i in 0..p {
            for k in i + 1..p {
                let (alpha, beta) = (norms[i], norms[k]);
                if alpha == F::Real::zero() || beta == F::Real::zero() {
                    continue;
                }
                let gamma = dotc(a.row(k), a.row(i));
                let g = gamma.modulus();
                if g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.scale(one / g);
                let zeta = (beta - alpha) / (two * g);
                let t = if zeta >= F::Real::zero() {
                    one / (zeta + (one + zeta * zeta).sqrt())
                } else {
                    -one / (-zeta + (one + zeta * zeta).sqrt())
                };
                let c = one / (one + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut a, i, k, phase, c, s);
                rotate_rows(&mut j, i, k, phase, c, s);
                norms[i] = norm2(a.row(i));
                norms[k] = norm2(a.row(k));
            }
        }
        sweeps += 1;
        if !rotated {
            break;
        }
        if sweeps >= limit {
            return Err(LinalgError::NoConvergence { routine: "one-sided Jacobi SVD", limit });
        }
    }

    let raw: Vec<F::Real> = norms.iter().map(|x| x.sqrt()).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| raw[x].partial_cmp(&raw[y]).unwrap_or(std::cmp::Ordering::Equal));

    let mut sigma = Vec::with_capacity(p);
    let mut right = Matrix::zeros(p, n);
    let mut left = Matrix::zeros(p, p);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = raw[src];
        sigma.push(s);
        for (x, &y) in left.row_mut(dst).iter_mut().zip(j.row(src)) {
            *x = y.conj();
        }
        if s > F::Real::zero() {
            let inv = one / s;
            for (x, &y) in right.row_mut(dst).iter_mut().zip(a.row(src)) {
                *x = y.conj().scale(inv);
            }
        } else {
            missing.push(dst);
        }
    }
    complete_orthonormal(&mut right, &missing);
    Ok(Svd { sigma, right, left, sweeps })
}

/// `x ← c x − s φ y`, `y ← s x + c φ y` on rows `i`, `k`.
fn rotate_rows<F: Scalar>(m: &mut Matrix<F>, i: usize, k: usize, phase: F, c: F::Real, s: F::Real) {
    let (x, y) = m.row_pair_mut(i, k);
    for (xv, yv) in x.iter_mut().zip(y.iter_mut()) {
        let xo = *xv;
        let yo = phase * *yv;
        *xv = xo.scale(c) - yo.scale(s);
        *yv = xo.scale(s) + yo.scale(c);
    }
}

/// Fills the listed rows with unit vectors orthogonal to every other row.
fn complete_orthonormal<F: Scalar>(m: &mut Matrix<F>, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let n = m.cols();
    let mut filled: Vec<usize> = (0..m.rows()).filter(|r| !missing.contains(r)).collect();
    let mut candidate = 0;
    for &r in missing {
        while candidate < n {
            let mut v = vec![F::zero(); n];
            v[candidate] = F::one();
            candidate += 1;
            for _ in 0..2 {
                for &q in &filled {
                    let proj = dotc(m.row(q), &v);
                    for (vi, &qi) in v.iter_mut().zip(m.row(q)) {
                        *vi -= proj * qi;
                    }
                }
            }
            let nv = norm2(&v).sqrt();
            if nv > F::Real::half() {
                let inv = F::Real::one() / nv;
                for (x, vi) in m.row_mut(r).iter_mut().zip(v) {
                    *x = vi.scale(inv);
                }
                filled.push(r);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    fn check<F: Scalar<Real = f64>>(m: &Matrix<F>, svd: &Svd<F>, tol: f64) {
        let (p, n) = m.shape();
        for i in 0..p {
            let mu = m.matvec(svd.right.row(i));
            let res: f64 = mu
                .iter()
                .zip(svd.left.row(i))
                .map(|(a, b)| (*a - b.scale(svd.sigma[i])).abs2())
                .sum::<f64>()
                .sqrt();
            assert!(res < tol, "residual {res}");
            for k in 0..p {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert!((dotc(svd.right.row(i), svd.right.row(k)).re() - expect).abs() < tol);
                assert!((dotc(svd.left.row(i), svd.left.row(k)).re() - expect).abs() < tol);
            }
        }
        assert!(svd.sigma.windows(2).all(|w| w[0] <= w[1]));
        let _ = n;
    }

    #[test]
    fn diagonal_embedding() {
        let m = Matrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let svd = jacobi_svd(&m, None).unwrap();
        assert_eq!(svd.sigma, vec![1.0, 3.0]);
        check(&m, &svd, 1e-14);
    }

    #[test]
    fn rank_deficient_rows_get_completed() {
        let m = Matrix::<f64>::from_rows(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]);
        let svd = jacobi_svd(&m, None).unwrap();
        assert!(svd.sigma[0].abs() < 1e-14);
        assert!((svd.sigma[1] - (28.0f64).sqrt()).abs() < 1e-13);
        check(&m, &svd, 1e-13);
    }

    #[test]
    fn complex_random_with_and_without_start() {
        let mut s = 7;
        let m = Matrix::from_fn(6, 9, |_, _| Complex64::new(lcg(&mut s), lcg(&mut s)));
        let plain = jacobi_svd(&m, None).unwrap();
        check(&m, &plain, 1e-12);
        let eig = super::super::hermitian_eigen(&m.gram_rows()).unwrap();
        let start = eig.vectors.map(|x| x.conj());
        let warm = jacobi_svd(&m, Some(&start)).unwrap();
        check(&m, &warm, 1e-12);
        assert!(warm.sweeps <= plain.sweeps);
        for (a, b) in plain.sigma.iter().zip(&warm.sigma) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_matrix() {
        let m = Matrix::<f64>::zeros(2, 4);
        let svd = jacobi_svd(&m, None).unwrap();
        assert_eq!(svd.sigma, vec![0.0, 0.0]);
        check(&m, &svd, 1e-14);
    }
}
