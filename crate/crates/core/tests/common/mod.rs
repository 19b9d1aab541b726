#![allow(dead_code)]

use rmt_lab::ensembles::{sample_matrix, DistributionSpec, Entries};
use rmt_lab::linalg::Matrix;
use rmt_lab::scalar::{dotc, Scalar};
use rmt_lab::Complex64;
use twofloat::TwoFloat;

pub fn gaussian_real(p: usize, n: usize, seed: u64) -> Matrix<f64> {
    match sample_matrix(&DistributionSpec::gaussian_real(), p, n, seed, 0).unwrap().entries {
        Entries::Real(m) => m,
        Entries::Complex(_) => unreachable!(),
    }
}

pub fn gaussian_complex(p: usize, n: usize, seed: u64) -> Matrix<Complex64> {
    match sample_matrix(&DistributionSpec::gaussian_complex(), p, n, seed, 0).unwrap().entries {
        Entries::Complex(m) => m,
        Entries::Real(_) => unreachable!(),
    }
}

/// Haar-ish unitary from Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> Matrix<Complex64> {
    let g = gaussian_complex(n, n, seed);
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for i in 0..n {
        let mut v = g.row(i).to_vec();
        for _ in 0..2 {
            for q in &rows {
                let c = dotc(q, &v);
                for (x, a) in v.iter_mut().zip(q) {
                    *x -= c * a;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        rows.push(v.into_iter().map(|x| x / norm).collect());
    }
    Matrix::from_rows(&rows)
}

/// Eigenvalues of the Hermitian `m m*`, ascending, by cyclic Jacobi in
/// double-double arithmetic on the real symmetric embedding
/// `[[X, −Y], [Y, X]]` of `X + iY`; each eigenvalue appears twice there.
#[allow(clippy::needless_range_loop)]
pub fn extended_gram_eigenvalues<F: Scalar<Real = f64>>(m: &Matrix<F>) -> Vec<TwoFloat> {
    let (p, n) = m.shape();
    let dd = |x: f64| TwoFloat::from(x);
    // entries of m m* accumulated in double-double
    let mut x = vec![vec![dd(0.0); p]; p];
    let mut y = vec![vec![dd(0.0); p]; p];
    for i in 0..p {
        for j in 0..p {
            let (mut re, mut im) = (dd(0.0), dd(0.0));
            for k in 0..n {
                let (a, b) = (m[(i, k)], m[(j, k)]);
                let (ar, ai, br, bi) = (dd(a.re()), dd(a.im()), dd(b.re()), dd(-b.im()));
                re += ar * br - ai * bi;
                im += ar * bi + ai * br;
            }
            x[i][j] = re;
            y[i][j] = im;
        }
    }
    let size = 2 * p;
    let mut a = vec![vec![dd(0.0); size]; size];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = x[i][j];
            a[i + p][j + p] = x[i][j];
            a[i][j + p] = -y[i][j];
            a[i + p][j] = y[i][j];
        }
    }
    let off = |a: &Vec<Vec<TwoFloat>>| {
        let mut s = dd(0.0);
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    s += *v * *v;
                }
            }
        }
        s
    };
    let scale: TwoFloat = a.iter().flatten().fold(dd(0.0), |s, v| s + *v * *v);
    for _sweep in 0..60 {
        if off(&a) <= scale * dd(1e-62) {
            break;
        }
        for pi in 0..size {
            for qi in pi + 1..size {
                let apq = a[pi][qi];
                if apq == dd(0.0) {
                    continue;
                }
                let theta = (a[qi][qi] - a[pi][pi]) / (dd(2.0) * apq);
                let sign = if theta < dd(0.0) { dd(-1.0) } else { dd(1.0) };
                let t = sign / (theta.abs() + (theta * theta + dd(1.0)).sqrt());
                let c = dd(1.0) / (t * t + dd(1.0)).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[pi], row[qi]);
                    row[pi] = c * kp - s * kq;
                    row[qi] = s * kp + c * kq;
                }
                for k in 0..size {
                    let (pk, qk) = (a[pi][k], a[qi][k]);
                    a[pi][k] = c * pk - s * qk;
                    a[qi][k] = s * pk + c * qk;
                }
            }
        }
    }
    let mut vals: Vec<TwoFloat> = (0..size).map(|i| a[i][i]).collect();
    vals.sort_by(|u, v| u.partial_cmp(v).unwrap());
    vals.into_iter().step_by(2).collect()
}

/// Multiset distance after sorting both sides.
pub fn sorted_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    assert_eq!(a.len(), b.len());
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
