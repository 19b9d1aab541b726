use proptest::prelude::*;
use rmt_lab::ensembles::{sample_matrix, DistributionSpec};
use rmt_lab::linalg::Matrix;
use rmt_lab::mp_law::MpModel;
use rmt_lab::spectra::{covariance_spectrum, decompose, decompose_matrix, Decomposition};
use rmt_lab::stats::*;

fn dist(v: &[f64]) -> EmpiricalDistribution {
    EmpiricalDistribution::new(v.to_vec()).unwrap()
}

fn gaussian_spectrum(p: usize, n: usize, seed: u64) -> Vec<f64> {
    covariance_spectrum(&sample_matrix(&DistributionSpec::gaussian_real(), p, n, seed, 0).unwrap()).unwrap()
}

/// `sup |F_A − F_B|` by evaluating both step functions at every sample point.
fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let count = |v: &[f64], x: f64| v.iter().filter(|&&t| t <= x).count() as f64 / v.len() as f64;
    a.iter().chain(b).map(|&x| (count(a, x) - count(b, x)).abs()).fold(0.0, f64::max)
}

fn naive_q(sigmas: &[f64], i: usize, p: usize, n: usize) -> f64 {
    let s = sigmas[i - 1];
    let mut same = 0.0;
    let mut plus = 0.0;
    for (j, t) in sigmas.iter().enumerate() {
        plus += (t + s).powi(-2);
        if j != i - 1 {
            same += (t - s).powi(-2);
        }
    }
    (same + (n - p) as f64 / (s * s) + plus) / n as f64
}

fn naive_regularized_gap(sigmas: &[f64], i0: usize, l: usize, c1: f64, p: usize, n: usize) -> f64 {
    let n0 = (p + n) as f64;
    let mut out = f64::INFINITY;
    for lo in 1..=p {
        for hi in 1..=p {
            if lo <= i0 - l && i0 <= hi {
                let den = ((hi - lo) as f64).min(n0.ln().powf(c1)).powf(n0.ln().powf(0.9));
                out = out.min(n0.sqrt() * (sigmas[hi - 1] - sigmas[lo - 1]) / den);
            }
        }
    }
    out
}

#[test]
fn esd_examples() {
    let e = esd(&[3.0, 1.0, 2.0]).unwrap();
    assert_eq!(e.ecdf(2.0), 2.0 / 3.0);
    assert_eq!(e.ecdf(f64::NEG_INFINITY), 0.0);
    assert_eq!(e.ecdf(f64::INFINITY), 1.0);
    for (k, &x) in e.values().iter().enumerate() {
        assert!((e.ecdf(x) - e.ecdf(x - 1e-9) - 1.0 / 3.0).abs() < 1e-15, "jump {k}");
    }
    assert!(matches!(esd(&[]), Err(StatsError::Empty)));
    assert!(matches!(esd(&[1.0, f64::NAN]), Err(StatsError::NonFinite(_))));
}

#[test]
fn interval_report_examples() {
    let model = MpModel::for_shape(30, 40).unwrap();
    let lambdas = gaussian_spectrum(30, 40, 1);
    let (a, b) = (model.lower_edge(), model.upper_edge());
    let all = interval_report(&lambdas, &model, a - 10.0, b + 10.0).unwrap();
    assert_eq!(all.count, 30);
    assert!((all.expected - 30.0).abs() < 1e-9);
    assert!(all.deviation < 1e-10);
    let beyond = interval_report(&lambdas, &model, b + 50.0, b + 51.0).unwrap();
    assert_eq!(beyond.count, 0);
    assert!(beyond.expected.abs() < 1e-12);
    assert!(interval_report(&lambdas, &model, 1.0, 1.0).is_err());
    assert!(concentration_report(&lambdas, &model, 0.0).is_err());
}

#[test]
fn concentration_at_300_by_400() {
    let model = MpModel::for_shape(300, 400).unwrap();
    let good = (0..100)
        .filter(|&seed| {
            let reports = concentration_report(&gaussian_spectrum(300, 400, seed), &model, 0.2).unwrap();
            reports.iter().all(|r| r.deviation <= 0.5)
        })
        .count();
    assert!(good >= 95, "{good}/100");
}

#[test]
fn delocalization_examples() {
    let one = sample_matrix(&DistributionSpec::gaussian_real(), 1, 1, 4, 0).unwrap();
    let Decomposition::Real(d) = decompose(&one).unwrap() else { unreachable!() };
    assert!((delocalization_stat(&d) - 1.0).abs() < 1e-12);

    // singular vectors (1, ±1)/√2
    let flat = Matrix::from_rows(&[vec![1.5, -0.5], vec![-0.5, 1.5]]);
    assert!((delocalization_stat(&decompose_matrix(&flat).unwrap()) - 1.0).abs() < 1e-12);
}

#[test]
fn gap_examples() {
    let g = gap_stats(&[1.0, 2.0, 4.0], 10).unwrap();
    assert_eq!(g.normalized_gaps, vec![10.0, 20.0]);
    assert_eq!(g.min_gap, 1.0);
    assert_eq!(g.argmin, 1);
    assert_eq!(gap_stats(&[1.0, 1.0, 2.0], 10).unwrap().min_gap, 0.0);
    assert!(matches!(gap_stats(&[2.0, 1.0], 10), Err(StatsError::Unsorted(1))));

    // a repeated row and a zero row: λ = 0 twice
    let m = Matrix::from_rows(&[vec![1.0, 2.0, 0.0, 1.0], vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 0.0]]);
    let lambdas = rmt_lab::spectra::covariance_spectrum_matrix(&m).unwrap();
    assert!(gap_stats(&lambdas, 4).unwrap().min_gap < 1e-12);
}

#[test]
fn gaps_at_300_by_400() {
    let n = 400;
    let small = (0..100).filter(|&seed| gap_stats(&gaussian_spectrum(300, n, seed), n).unwrap().min_normalized_gap < 1.0 / n as f64).count();
    assert!(small <= 5, "{small}/100");
}

#[test]
fn regularized_gap_examples() {
    let sigmas: Vec<f64> = (1..=5).map(|k| k as f64).collect();
    let (p, n) = (5, 7);
    let g = regularized_gap(&sigmas, 2, 1, 1.0, p, n).unwrap();
    // unit gaps: a span k costs k / min(k, ln N0)^{ln^0.9 N0}
    let n0 = 12f64;
    let closed = (1..=4).map(|k| k as f64 / (k as f64).min(n0.ln()).powf(n0.ln().powf(0.9))).fold(f64::INFINITY, f64::min);
    assert!((g - n0.sqrt() * closed).abs() < 1e-12);
    // the exponent exceeds 1 here, so a wider span wins over the adjacent pair
    assert!(g < n0.sqrt());
    assert!((g - naive_regularized_gap(&sigmas, 2, 1, 1.0, p, n)).abs() < 1e-12);
    let scaled: Vec<f64> = sigmas.iter().map(|s| 3.0 * s).collect();
    assert!((regularized_gap(&scaled, 2, 1, 1.0, p, n).unwrap() - 3.0 * g).abs() < 1e-12);
    assert!(regularized_gap(&sigmas, 1, 1, 1.0, p, n).is_err());
    assert!(regularized_gap(&sigmas, 6, 1, 1.0, p, n).is_err());
    assert!(regularized_gap(&sigmas, 3, 0, 1.0, p, n).is_err());
}

#[test]
fn q_index_examples() {
    assert!((q_index(&[1.0, 2.0], 1, 2, 3).unwrap() - 85.0 / 108.0).abs() < 1e-15);
    let square = q_index(&[1.0, 2.0], 1, 2, 2).unwrap();
    assert!((square - (1.0 + 1.0 / 4.0 + 1.0 / 9.0) / 2.0).abs() < 1e-15);
    let mut prev = 0.0;
    for k in 1..10 {
        let q = q_index(&[1.0, 1.0 + 10f64.powi(-k)], 1, 2, 3).unwrap();
        assert!(q > prev);
        prev = q;
    }
    assert!(matches!(q_index(&[1.0, 1.0], 1, 2, 3), Err(StatsError::Degenerate { index: 1, other: 2 })));
    assert!(q_index(&[0.0, 1.0], 1, 2, 3).is_err());
    assert!(q_index(&[1.0, 2.0], 3, 2, 3).is_err());
}

#[test]
fn edge_normalization() {
    let (c, s) = edge_constants(600, 800, EdgeNormalization::Standard).unwrap();
    assert!((c - 14.359353944898176).abs() < 1e-12);
    assert!((s - 0.6676513438720343).abs() < 1e-12);
    assert_eq!(tw_normalize(c, 600, 800).unwrap(), 0.0);
    let (x1, x2) = (12.0, 17.5);
    let mid = tw_normalize(0.5 * (x1 + x2), 600, 800).unwrap();
    let ends = 0.5 * (tw_normalize(x1, 600, 800).unwrap() + tw_normalize(x2, 600, 800).unwrap());
    assert!((mid - ends).abs() < 1e-12);
    assert!(matches!(tw_normalize(1.0, 50, 50), Err(StatsError::HardEdge(50))));
    let (lc, ls) = edge_constants(600, 800, EdgeNormalization::Literal).unwrap();
    assert!(lc < 0.0 && ls < 0.0);
}

#[test]
fn ks_examples() {
    assert_eq!(ks_distance(&dist(&[1.0, 2.0]), &dist(&[1.0, 2.0])), 0.0);
    assert_eq!(ks_distance(&dist(&[0.0, 1.0]), &dist(&[10.0, 11.0])), 1.0);
    assert!((ks_distance(&dist(&[1.0, 2.0, 3.0]), &dist(&[2.0, 3.0, 4.0])) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn esd_approaches_mp_law() {
    let y = 0.5;
    let model = MpModel::new(y).unwrap();
    let mut medians = Vec::new();
    for n in [50usize, 100, 200, 400] {
        let p = (y * n as f64) as usize;
        let mut d: Vec<f64> = (0..50).map(|seed| mp_sup_distance(&gaussian_spectrum(p, n, seed), &model).unwrap()).collect();
        d.sort_by(f64::total_cmp);
        medians.push(0.5 * (d[24] + d[25]));
    }
    assert!(medians.windows(2).all(|w| w[1] < w[0]), "{medians:?}");
}

#[test]
fn projection_full_dimension() {
    let n = 50;
    let s = projection_concentration(&DistributionSpec::gaussian_real(), n, n, 2000, 3).unwrap();
    // E‖X‖² = n with variance 2n
    let se = (2.0 * n as f64 / 2000.0).sqrt();
    assert!((s.mean_norm_sq - n as f64).abs() < 5.0 * se, "{}", s.mean_norm_sq);
    assert!(s.nominal_k);
    assert_eq!(s.exceedance.len(), 10);
}

#[test]
fn projection_one_dimension_is_half_normal() {
    let trials = 10_000;
    let s = projection_concentration(&DistributionSpec::gaussian_real(), 40, 1, trials, 11).unwrap();
    let mut norms: Vec<f64> = s.deviations.iter().map(|d| d + 1.0).collect();
    norms.sort_by(f64::total_cmp);
    // half-normal CDF erf(x/√2) by Simpson's rule between consecutive points
    let density = |t: f64| (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * t * t).exp();
    let simpson = |lo: f64, hi: f64| {
        let m = 16;
        let h = (hi - lo) / m as f64;
        let mut acc = density(lo) + density(hi);
        for k in 1..m {
            acc += density(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let (mut cdf, mut prev, mut ks) = (0.0, 0.0, 0.0f64);
    for (k, &x) in norms.iter().enumerate() {
        cdf += simpson(prev, x);
        prev = x;
        ks = ks.max((cdf - k as f64 / trials as f64).abs()).max(((k + 1) as f64 / trials as f64 - cdf).abs());
    }
    assert!(ks <= 0.05, "{ks}");
}

#[test]
fn projection_tail_bound() {
    for name in ["bernoulli", "gaussian", "trunc:K=3:base=gaussian", "bernoulli-complex"] {
        let spec = DistributionSpec::from_name(name).unwrap();
        let s = projection_concentration(&spec, 60, 12, 2000, 5).unwrap();
        let &(t, frac, bound) = s.exceedance.last().unwrap();
        assert!((t - 10.0 * s.k).abs() < 1e-12);
        assert!((bound - 10.0 * (-10.0f64).exp()).abs() < 1e-15);
        assert!(frac <= bound, "{name}: {frac}");
    }
    assert!(projection_concentration(&DistributionSpec::gaussian_real(), 5, 6, 10, 0).is_err());
    assert!(projection_concentration(&DistributionSpec::gaussian_real(), 5, 0, 10, 0).is_err());
}

fn small_sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-20i32..20).prop_map(f64::from), 1..25)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ks_is_a_metric(a in small_sample(), b in small_sample(), c in small_sample()) {
        let (da, db, dc) = (dist(&a), dist(&b), dist(&c));
        let ab = ks_distance(&da, &db);
        prop_assert_eq!(ab, ks_distance(&db, &da));
        prop_assert!((ab - brute_ks(&a, &b)).abs() < 1e-15);
        prop_assert!(ab <= ks_distance(&da, &dc) + ks_distance(&dc, &db) + 1e-15);
        prop_assert_eq!(ks_distance(&da, &da), 0.0);
    }

    #[test]
    fn ks_ignores_common_affine_maps(a in small_sample(), b in small_sample(), scale in prop_oneof![Just(2.0), Just(-3.0), Just(0.5)], shift in -5i32..5) {
        let map = |v: &[f64]| dist(&v.iter().map(|x| scale * x + f64::from(shift)).collect::<Vec<_>>());
        prop_assert!((ks_distance(&dist(&a), &dist(&b)) - ks_distance(&map(&a), &map(&b))).abs() < 1e-15);
    }

    #[test]
    fn histogram_integrates_to_one(v in prop::collection::vec(-1e3f64..1e3, 1..200), bins in 1usize..60) {
        let h = dist(&v).histogram(bins).unwrap();
        prop_assert!((h.integral() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(h.counts.iter().sum::<usize>(), v.len());
    }

    #[test]
    fn q_index_matches_naive(raw in prop::collection::vec(0.01f64..10.0, 2..12), extra in 0usize..5, pick in 0usize..100) {
        let mut sigmas = raw;
        sigmas.sort_by(f64::total_cmp);
        sigmas.dedup();
        let p = sigmas.len();
        let i = pick % p + 1;
        let fast = q_index(&sigmas, i, p, p + extra).unwrap();
        let slow = naive_q(&sigmas, i, p, p + extra);
        prop_assert!((fast - slow).abs() <= 1e-12 * slow.abs(), "{} vs {}", fast, slow);
    }

    #[test]
    fn regularized_gap_matches_naive(raw in prop::collection::vec(0.0f64..5.0, 3..15), extra in 0usize..20, pick in 0usize..100, c1 in 0.5f64..3.0) {
        let mut sigmas = raw;
        sigmas.sort_by(f64::total_cmp);
        let p = sigmas.len();
        let i0 = pick % (p - 1) + 2;
        let l = pick % (i0 - 1) + 1;
        let fast = regularized_gap(&sigmas, i0, l, c1, p, p + extra).unwrap();
        let slow = naive_regularized_gap(&sigmas, i0, l, c1, p, p + extra);
        prop_assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow.abs()), "{} vs {}", fast, slow);
    }
}
