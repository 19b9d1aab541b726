//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not reach tolerance {tolerance:e} after {subdivisions} subdivisions (error estimate {estimate:e})")]
    Tolerance { tolerance: f64, estimate: f64, subdivisions: usize },
    #[error("integrand produced a non-finite value at x = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy)]
struct Panel<T> {
    lo: T,
    hi: T,
    value: T,
    error: T,
}

fn kronrod<T: Real>(f: &mut impl FnMut(T) -> T, lo: T, hi: T) -> Result<Panel<T>, QuadratureError> {
    let center = (lo + hi) * T::half();
    let half = (hi - lo) * T::half();
    let mut eval = |x: T| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite(x.to_f64_lossy()))
        }
    };
    let fc = eval(center)?;
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * T::lit(x);
        let pair = eval(center - dx)? + eval(center + dx)?;
        kron += T::lit(w) * pair;
        if j % 2 == 1 {
            gauss += T::lit(WG[j / 2]) * pair;
        }
    }
    Ok(Panel { lo, hi, value: kron * half, error: ((kron - gauss) * half).abs() })
}

/// `∫_lo^hi f`, refined until the summed error estimate is below
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<T: Real>(
    mut f: impl FnMut(T) -> T,
    lo: T,
    hi: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<Estimate<T>, QuadratureError> {
    integrate_with_limit(&mut f, lo, hi, abs_tol, rel_tol, DEFAULT_MAX_SUBDIVISIONS)
}

pub fn integrate_with_limit<T: Real>(
    f: &mut impl FnMut(T) -> T,
    lo: T,
    hi: T,
    abs_tol: T,
    rel_tol: T,
    max_subdivisions: usize,
) -> Result<Estimate<T>, QuadratureError> {
    if lo == hi {
        return Ok(Estimate { value: T::zero(), error: T::zero() });
    }
    let mut panels = vec![kronrod(f, lo, hi)?];
    let floor = T::lit(50.0) * T::unit_roundoff();
    loop {
        let value: T = panels.iter().map(|p| p.value).fold(T::zero(), |a, b| a + b);
        let error: T = panels.iter().map(|p| p.error).fold(T::zero(), |a, b| a + b);
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target {
            return Ok(Estimate { value, error });
        }
        // panels that are already at roundoff level cannot be improved
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| (p.hi - p.lo).abs() > floor * (p.lo.abs() + p.hi.abs()))
            .max_by(|a, b| a.1.error.partial_cmp(&b.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i);
        let Some(worst) = worst else {
            return Ok(Estimate { value, error });
        };
        if panels.len() >= max_subdivisions {
            return Err(QuadratureError::Tolerance {
                tolerance: target.to_f64_lossy(),
                estimate: error.to_f64_lossy(),
                subdivisions: panels.len(),
            });
        }
        let p = panels.swap_remove(worst);
        let mid = (p.lo + p.hi) * T::half();
        panels.push(kronrod(f, p.lo, mid)?);
        panels.push(kronrod(f, mid, p.hi)?);
    }
}

/// `∫_lo^hi f` after the substitution `x = lo + (hi − lo) sin²φ`, which turns
/// square-root behaviour at either endpoint into a smooth integrand.
pub fn integrate_sqrt_endpoints<T: Real>(
    mut f: impl FnMut(T) -> T,
    lo: T,
    hi: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<Estimate<T>, QuadratureError> {
    let width = hi - lo;
    let quarter_turn = T::FRAC_PI_2();
    integrate(
        |phi: T| {
            let (s, c) = phi.sin_cos();
            let x = lo + width * s * s;
            f(x) * width * T::two() * s * c
        },
        T::zero(),
        quarter_turn,
        abs_tol,
        rel_tol,
    )
}
