mod common;

use common::*;
use proptest::prelude::*;
use rmt_lab::ensembles::{sample_matrix, DistributionSpec, MatrixSample};
use rmt_lab::linalg::{operator_norm, Matrix};
use rmt_lab::scalar::{dotc, Scalar};
use rmt_lab::spectra::*;
use rmt_lab::Complex64;

fn gram_error<F: Scalar<Real = f64>>(rows: &Matrix<F>) -> f64 {
    let k = rows.rows();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let g = dotc(rows.row(i), rows.row(j));
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - F::from_real(target)).modulus());
        }
    }
    worst
}

fn check_invariants<F: Scalar<Real = f64>>(m: &Matrix<F>) {
    let d = decompose_matrix(m).unwrap();
    let op = operator_norm(m).unwrap();
    assert!(d.sigma.windows(2).all(|w| w[0] <= w[1]));
    assert!(d.sigma.iter().all(|&s| s >= 0.0));
    assert!(gram_error(&d.right) <= 1e-8 && gram_error(&d.left) <= 1e-8);
    for i in 0..d.p {
        let u = d.right.row(i);
        let v = d.left.row(i);
        let nu: f64 = u.iter().map(|x| x.abs2()).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|x| x.abs2()).sum::<f64>().sqrt();
        assert!((nu - 1.0).abs() <= 1e-10 && (nv - 1.0).abs() <= 1e-10);
        let back = m.adjoint_matvec(v);
        let r: f64 = back.iter().zip(u).map(|(a, b)| (*a - b.scale(d.sigma[i])).abs2()).sum::<f64>().sqrt();
        assert!(r <= 1e-8 * op.max(1e-300), "M* v residual {r}");
    }
    assert!(d.residual_norm <= 1e-8 * op.max(1e-300));
    let nf = d.n as f64;
    for (s, l) in d.sigma.iter().zip(&d.lambda) {
        assert_eq!(*l, s * s / nf);
    }
    let rec = d.reconstruct().sub(m).unwrap().frobenius_norm();
    assert!(rec <= 1e-8 * m.frobenius_norm().max(1e-300), "reconstruction error {rec}");
}

#[test]
fn complex_8x12_matches_extended_precision_oracle() {
    for seed in 0..5 {
        let m = gaussian_complex(8, 12, 100 + seed);
        let d = decompose_matrix(&m).unwrap();
        let oracle = extended_gram_eigenvalues(&m);
        for (s, l) in d.sigma.iter().zip(&oracle) {
            let exact = l.sqrt().hi();
            assert!((s - exact).abs() <= 1e-10 * exact, "{s} vs {exact}");
        }
    }
}

#[test]
fn real_matches_extended_precision_oracle() {
    let m = gaussian_real(5, 7, 3);
    let d = decompose_matrix(&m).unwrap();
    for (s, l) in d.sigma.iter().zip(&extended_gram_eigenvalues(&m)) {
        let exact = l.sqrt().hi();
        assert!((s - exact).abs() <= 1e-12 * exact);
    }
}

#[test]
fn non_finite_input_is_rejected() {
    let mut m = gaussian_real(2, 3, 0);
    m[(1, 1)] = f64::NAN;
    assert!(matches!(decompose_matrix(&m), Err(SpectraError::Linalg(_))));
    assert!(covariance_spectrum_matrix(&m).is_err());
}

#[test]
fn tall_input_is_rejected() {
    assert!(matches!(decompose_matrix(&gaussian_real(3, 3, 0).without_col(0)), Err(SpectraError::Shape(_))));
}

#[test]
fn single_precision_decomposition() {
    let m = gaussian_real(4, 6, 8).map(|x| x as f32);
    let d = decompose_matrix(&m).unwrap();
    let m64 = m.map(|x| x as f64);
    let d64 = decompose_matrix(&m64).unwrap();
    for (a, b) in d.sigma.iter().zip(&d64.sigma) {
        assert!((*a as f64 - b).abs() <= 1e-5 * b);
    }
    assert!(d.residual_norm <= 1e-5 * d.sigma[3]);
}

#[test]
fn augmented_spectrum_matches_decomposition() {
    for (seed, complex) in [(1, false), (2, true)] {
        let spec = if complex { DistributionSpec::gaussian_complex() } else { DistributionSpec::gaussian_real() };
        let s = sample_matrix(&spec, 4, 7, seed, 0).unwrap();
        let aug = augmented(&s);
        assert_eq!(aug.dimension, 11);
        let d = decompose(&s).unwrap();
        let mut expect: Vec<f64> = d.sigma().iter().flat_map(|&x| [x, -x]).collect();
        expect.extend([0.0; 3]);
        assert!(sorted_max_diff(&aug.eigenvalues().unwrap(), &expect) <= 1e-8);
        match &aug.entries {
            rmt_lab::ensembles::Entries::Real(a) => assert!((0..11).all(|i| a[(i, i)] == 0.0)),
            rmt_lab::ensembles::Entries::Complex(a) => assert!((0..11).all(|i| a[(i, i)] == Complex64::new(0.0, 0.0))),
        }
    }
}

#[test]
fn y_one_top_eigenvalue_near_four() {
    let spec = DistributionSpec::gaussian_real();
    let inside = (0..100)
        .filter(|&seed| {
            let s = sample_matrix(&spec, 600, 600, seed, 0).unwrap();
            let l = covariance_spectrum(&s).unwrap();
            (3.5..=4.5).contains(l.last().unwrap())
        })
        .count();
    assert!(inside >= 99, "{inside}/100");
}

#[test]
fn zero_conventions() {
    let s = sample_matrix(&DistributionSpec::gaussian_real(), 3, 5, 1, 0).unwrap();
    let a = covariance_spectrum_with(&s, ZeroConvention::Nontrivial).unwrap();
    let b = covariance_spectrum_with(&s, ZeroConvention::WithZeros).unwrap();
    assert_eq!(b.len(), 5);
    assert_eq!(&b[2..], &a[..]);
    assert_eq!(&b[..2], &[0.0, 0.0]);
}

#[test]
fn interlacing_random_and_square() {
    for (p, n) in [(5, 8), (8, 8)] {
        let r = verify_interlacing_law(&MatrixSample::from_real(gaussian_real(p, n, 7))).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.max_violation() <= 1e-9);
        assert_eq!(r.column_minor.minors_checked, n);
    }
    let c = verify_interlacing_law(&MatrixSample::from_complex(gaussian_complex(6, 9, 2))).unwrap();
    assert!(c.holds());
    assert!(verify_interlacing_law(&MatrixSample::from_real(gaussian_real(1, 4, 0))).is_err());
}

#[test]
fn weyl_small_perturbation() {
    let m = gaussian_real(6, 9, 4);
    let e = gaussian_real(6, 9, 5);
    let e = e.map(|x| x / operator_norm(&e).unwrap());
    let n = m.add(&e.map(|x| x * 1e-3)).unwrap();
    let r = verify_weyl(&MatrixSample::from_real(m), &MatrixSample::from_real(n)).unwrap();
    assert!(r.holds);
    assert!(r.max_shift <= 1e-3 + WEYL_TOL);
}

#[test]
fn weyl_aligned_rank_one_is_tight() {
    let m = gaussian_complex(5, 8, 6);
    let d = decompose_matrix(&m).unwrap();
    // N = M + 10 v_p u_p* shifts σ_p by exactly 10
    let (u, v) = (d.right.row(4), d.left.row(4));
    let bump = Matrix::from_fn(5, 8, |i, j| v[i] * u[j].conj() * 10.0);
    let n = m.add(&bump).unwrap();
    let r = verify_weyl(&MatrixSample::from_complex(m), &MatrixSample::from_complex(n)).unwrap();
    assert!(r.holds);
    assert!((r.max_shift - 10.0).abs() < 1e-9);
    assert!((r.operator_norm - 10.0).abs() < 1e-9);
}

#[test]
fn weyl_mixed_fields_and_shape_mismatch() {
    let a = MatrixSample::from_real(gaussian_real(3, 4, 1));
    let b = MatrixSample::from_complex(gaussian_complex(3, 4, 1));
    assert!(verify_weyl(&a, &b).unwrap().holds);
    let c = MatrixSample::from_real(gaussian_real(3, 5, 1));
    assert!(matches!(verify_weyl(&a, &c), Err(SpectraError::Shape(_))));
}

#[test]
fn coordinate_formula_gaussian_6x9() {
    let s = sample_matrix(&DistributionSpec::gaussian_real(), 6, 9, 11, 0).unwrap();
    let r = verify_coordinate_formula(&s, 3).unwrap();
    assert!(r.residual <= 1e-9, "{r:?}");
    let c = sample_matrix(&DistributionSpec::gaussian_complex(), 6, 9, 11, 0).unwrap();
    for i in 1..=6 {
        assert!(verify_coordinate_formula(&c, i).unwrap().residual <= 1e-9);
    }
    assert!(matches!(verify_coordinate_formula(&s, 7), Err(SpectraError::Index { index: 7, max: 6 })));
    assert!(matches!(verify_coordinate_formula(&s, 0), Err(SpectraError::Index { .. })));
}

#[test]
fn coordinate_formula_square() {
    let s = MatrixSample::from_real(gaussian_real(5, 5, 9));
    for i in 1..=5 {
        assert!(verify_coordinate_formula(&s, i).unwrap().residual <= 1e-9);
    }
}

#[test]
fn identity_random_5x7_and_homogeneity() {
    let m = gaussian_real(5, 7, 12);
    let r = verify_interlacing_identity_matrix(&m).unwrap();
    assert!(r.max_residual() <= 1e-8, "{r:?}");
    let scaled = verify_interlacing_identity_matrix(&m.map(|x| x * 37.0)).unwrap();
    assert!(scaled.column_split <= 1e-8 && (scaled.column_split - r.column_split).abs() <= 1e-12);
    let c = verify_interlacing_identity_matrix(&gaussian_complex(4, 4, 3)).unwrap();
    assert!(c.max_residual() <= 1e-8);
}

#[test]
fn identity_rejects_degenerate_spectrum() {
    let m = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]]);
    assert!(matches!(verify_interlacing_identity_matrix(&m), Err(SpectraError::Degenerate { .. })));
}

/// A 6 × 9 Gaussian draw where σ_4 sits 6.1e-9 from σ_4 of the column minor.
fn near_collision() -> MatrixSample {
    sample_matrix(&DistributionSpec::gaussian_real(), 6, 9, 2024, 776).unwrap()
}

#[test]
fn near_collision_is_refused_in_f64() {
    let s = near_collision();
    let rmt_lab::ensembles::Entries::Real(m) = &s.entries else { unreachable!() };
    assert!(matches!(verify_coordinate_formula_matrix(m, 4), Err(SpectraError::Degenerate { target: 4, .. })));
    assert!(matches!(verify_interlacing_identity_matrix(m), Err(SpectraError::Degenerate { .. })));
}

#[test]
fn near_collision_is_resolved_in_double_double() {
    let s = near_collision();
    let r = verify_interlacing_identity(&s).unwrap();
    assert!(r.extended_precision);
    assert!(r.min_separation < SEPARATION_TOL, "{r:?}");
    assert!(r.max_residual() <= 1e-10, "{r:?}");
    for i in 1..=6 {
        let c = verify_coordinate_formula(&s, i).unwrap();
        assert_eq!(c.extended_precision, i == 4, "{c:?}");
        assert!(c.residual <= 1e-12, "{c:?}");
    }
}

#[test]
fn well_separated_sample_stays_in_f64() {
    let s = MatrixSample::from_real(Matrix::from_rows(&[vec![2.0, 0.0, 1.0], vec![0.0, 1.0, 0.5]]));
    let r = verify_coordinate_formula(&s, 2).unwrap();
    assert!(!r.extended_precision && r.min_separation >= REFINE_GAP, "{r:?}");
    assert!(r.residual <= 1e-14);
}

#[test]
fn exact_collision_is_refused_at_every_precision() {
    let s = MatrixSample::from_real(Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]]));
    assert!(matches!(verify_interlacing_identity(&s), Err(SpectraError::Degenerate { .. })));
    assert!(matches!(verify_coordinate_formula(&s, 1), Err(SpectraError::Degenerate { .. })));
    let c = MatrixSample::from_complex(Matrix::from_rows(&[
        vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)],
    ]));
    assert!(matches!(verify_coordinate_formula(&c, 1), Err(SpectraError::Degenerate { .. })));
}

#[test]
fn schur_random_hermitian() {
    let g = gaussian_complex(6, 6, 21);
    let h = Matrix::from_fn(6, 6, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
    let r = verify_schur_stieltjes(&h, Complex64::new(2.0, 1.0)).unwrap();
    assert!(r.residual <= 1e-10, "{r:?}");
    let top = rmt_lab::linalg::hermitian_eigenvalues(&h).unwrap()[5];
    let r = verify_schur_stieltjes(&h, Complex64::new(top + 10.0, 0.0)).unwrap();
    assert!(r.residual <= 1e-10);
    assert!(r.eigenvalue_side.im.abs() < 1e-15);
}

#[test]
fn reports_serialize() {
    let s = MatrixSample::from_real(gaussian_real(3, 5, 1));
    let json = serde_json::to_value(verify_interlacing_law(&s).unwrap()).unwrap();
    assert!(json["row_minor"]["max_violation"].is_number());
    let json = serde_json::to_value(verify_coordinate_formula(&s, 2).unwrap()).unwrap();
    assert_eq!(json["index"], 2);
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=8).prop_flat_map(|p| (Just(p), p..=12))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn decomposition_invariants_real((p, n) in shape(), seed in any::<u64>()) {
        check_invariants(&gaussian_real(p, n, seed));
    }

    #[test]
    fn decomposition_invariants_complex((p, n) in shape(), seed in any::<u64>()) {
        check_invariants(&gaussian_complex(p, n, seed));
    }

    #[test]
    fn unitary_invariance((p, n) in shape(), seed in any::<u64>()) {
        let m = gaussian_complex(p, n, seed);
        let u = random_unitary(p, seed ^ 1);
        let v = random_unitary(n, seed ^ 2);
        let rotated = u.matmul(&m).unwrap().matmul(&v).unwrap();
        let a = decompose_matrix(&m).unwrap().sigma;
        let b = decompose_matrix(&rotated).unwrap().sigma;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * a[p - 1].max(1.0));
        }
    }

    #[test]
    fn covariance_is_sigma_squared_over_n((p, n) in shape(), seed in any::<u64>()) {
        let m = gaussian_real(p, n, seed);
        let d = decompose_matrix(&m).unwrap();
        let l = covariance_spectrum_matrix(&m).unwrap();
        for (a, b) in l.iter().zip(&d.lambda) {
            prop_assert!((a - b).abs() <= 1e-12 * d.lambda[p - 1]);
        }
    }

    #[test]
    fn augmented_matches_sigma((p, n) in shape(), seed in any::<u64>()) {
        let s = MatrixSample::from_complex(gaussian_complex(p, n, seed));
        let d = decompose(&s).unwrap();
        let mut expect: Vec<f64> = d.sigma().iter().flat_map(|&x| [x, -x]).collect();
        expect.extend(std::iter::repeat_n(0.0, n - p));
        prop_assert!(sorted_max_diff(&augmented(&s).eigenvalues().unwrap(), &expect) <= 1e-8);
    }
}
