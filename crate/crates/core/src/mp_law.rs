//! Marchenko–Pastur law: density, distribution function, quantiles, the
//! Stieltjes transform and principal-value integrals against the density.
//!
//! For aspect ratio `y ∈ (0, 1]` the law lives on `[a, b]` with
//! `a = (1 − √y)²`, `b = (1 + √y)²` and has density
//! `ρ(x) = √((b − x)(x − a)) / (2π x y)`.
//!
//! Integrals against `ρ` use the substitution `x = a + (b − a) sin²φ`, under
//! which `ρ(x) dx = (b − a)² sin²φ cos²φ / (π y x) dφ` is smooth on
//! `[0, π/2]`, including the hard edge `a = 0` at `y = 1`.

use num_complex::Complex;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{integrate, integrate_sqrt_endpoints, QuadratureError};
use crate::scalar::Real;

/// Absolute error target of [`MpModel::cdf`].
pub const CDF_TOL: f64 = 1e-12;
/// Bracket width at which [`MpModel::quantile`] stops bisecting.
pub const QUANTILE_TOL: f64 = 1e-12;
/// Absolute error target of [`MpModel::pv_edge_integral`].
pub const PV_TOL: f64 = 1e-4;
/// Smallest admissible `|y + z − 1 + y z s|` in the functional equation check.
pub const MIN_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpError {
    #[error("aspect ratio must lie in (0, 1], got {0}")]
    AspectRatio(f64),
    #[error("z = {0} lies on the branch cut [a, b]")]
    BranchCut(f64),
    #[error("functional equation denominator {0:e} is degenerate")]
    DegenerateDenominator(f64),
    #[error("quantile level must lie in [0, 1], got {0}")]
    QuantileLevel(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Marchenko–Pastur law with aspect ratio `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpModel<T> {
    y: T,
    a: T,
    b: T,
}

impl<T: Real> MpModel<T> {
    pub fn new(y: T) -> Result<Self, MpError> {
        if !(y > T::zero() && y <= T::one()) {
            return Err(MpError::AspectRatio(y.to_f64_lossy()));
        }
        let r = y.sqrt();
        let a = (T::one() - r) * (T::one() - r);
        let b = (T::one() + r) * (T::one() + r);
        Ok(Self { y, a, b })
    }

    /// Model for the ratio `p / n` of a `p × n` sample.
    pub fn for_shape(p: usize, n: usize) -> Result<Self, MpError> {
        Self::new(T::from_usize_lossy(p) / T::from_usize_lossy(n))
    }

    #[inline]
    pub fn y(&self) -> T {
        self.y
    }

    /// Lower edge `a`.
    #[inline]
    pub fn lower_edge(&self) -> T {
        self.a
    }

    /// Upper edge `b`.
    #[inline]
    pub fn upper_edge(&self) -> T {
        self.b
    }

    /// `y = 1`: the lower edge is the hard edge `0`, where `ρ` blows up like `x^{-1/2}`.
    #[inline]
    pub fn has_hard_edge(&self) -> bool {
        self.a == T::zero()
    }

    /// `ρ(x)`; zero off `[a, b]`, `+∞` at the hard edge (an integrable singularity).
    pub fn density(&self, x: T) -> T {
        if x < self.a || x > self.b {
            return T::zero();
        }
        if x == T::zero() {
            return T::infinity();
        }
        let prod = ((self.b - x) * (x - self.a)).max(T::zero());
        prod.sqrt() / (T::two() * T::PI() * x * self.y)
    }

    #[inline]
    fn point(&self, phi: T) -> T {
        let s = phi.sin();
        self.a + (self.b - self.a) * s * s
    }

    /// `ρ(x(φ)) dx/dφ`.
    #[inline]
    fn mass(&self, phi: T) -> T {
        let (s, c) = phi.sin_cos();
        let w = self.b - self.a;
        let x = self.a + w * s * s;
        if x == T::zero() {
            // hard edge limit: s²/x → 1/w
            return w * c * c / (T::PI() * self.y);
        }
        w * w * s * s * c * c / (T::PI() * self.y * x)
    }

    #[inline]
    fn angle_of(&self, x: T) -> T {
        let t = ((x - self.a) / (self.b - self.a)).max(T::zero()).min(T::one());
        t.sqrt().asin()
    }

    pub fn cdf(&self, x: T) -> Result<T, MpError> {
        self.cdf_with_tol(x, T::lit(CDF_TOL))
    }

    pub fn cdf_with_tol(&self, x: T, tol: T) -> Result<T, MpError> {
        if x <= self.a {
            return Ok(T::zero());
        }
        if x >= self.b {
            return Ok(T::one());
        }
        let upper = self.angle_of(x);
        let r = integrate(|phi| self.mass(phi), T::zero(), upper, tol, T::zero())?;
        Ok(r.value.max(T::zero()).min(T::one()))
    }

    /// `∫_lo^hi ρ`.
    pub fn mass_between(&self, lo: T, hi: T) -> Result<T, MpError> {
        if hi <= lo {
            return Ok(T::zero());
        }
        Ok(self.cdf(hi)? - self.cdf(lo)?)
    }

    /// Smallest `x` with `cdf(x) ≥ q`, located by bisection.
    pub fn quantile(&self, q: T) -> Result<T, MpError> {
        if !(q >= T::zero() && q <= T::one()) {
            return Err(MpError::QuantileLevel(q.to_f64_lossy()));
        }
        if q == T::zero() {
            return Ok(self.a);
        }
        if q == T::one() {
            return Ok(self.b);
        }
        let (mut lo, mut hi) = (self.a, self.b);
        let tol = T::lit(QUANTILE_TOL);
        while hi - lo > tol {
            let mid = (lo + hi) * T::half();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo + hi) * T::half())
    }

    /// `∫ g ρ`.
    pub fn expectation(&self, mut g: impl FnMut(T) -> T, tol: T) -> Result<T, MpError> {
        let r = integrate(|phi| g(self.point(phi)) * self.mass(phi), T::zero(), T::FRAC_PI_2(), tol, T::zero())?;
        Ok(r.value)
    }

    /// `s(z) = ∫ ρ(x) / (x − z) dx` in closed form.
    ///
    /// The square root `√((y + z − 1)² − 4yz)` is realised as `√(z − a)·√(z − b)`
    /// with principal roots, which cuts exactly along `[a, b]` and grows like
    /// `y + z − 1` at infinity.
    pub fn stieltjes(&self, z: Complex<T>) -> Result<Complex<T>, MpError> {
        if z.im == T::zero() && z.re >= self.a && z.re <= self.b {
            return Err(MpError::BranchCut(z.re.to_f64_lossy()));
        }
        let one = Complex::new(T::one(), T::zero());
        let yc = Complex::new(self.y, T::zero());
        let w = yc + z - one;
        let root = (z - Complex::new(self.a, T::zero())).sqrt() * (z - Complex::new(self.b, T::zero())).sqrt();
        let plus = w + root;
        let minus = w - root;
        // (w − R)(w + R) = 4yz, so use whichever form avoids cancellation
        if plus.norm() >= minus.norm() {
            Ok(-Complex::new(T::two(), T::zero()) / plus)
        } else {
            Ok(-minus / (Complex::new(T::two(), T::zero()) * yc * z))
        }
    }

    /// `|s + 1 / (y + z − 1 + y z s)|` at the closed-form `s(z)`.
    pub fn verify_functional_equation(&self, z: Complex<T>) -> Result<T, MpError> {
        let s = self.stieltjes(z)?;
        let yc = Complex::new(self.y, T::zero());
        let one = Complex::<T>::one();
        let denom = yc + z - one + yc * z * s;
        let d = denom.norm();
        if d < T::lit(MIN_DENOMINATOR) {
            return Err(MpError::DegenerateDenominator(d.to_f64_lossy()));
        }
        Ok((s + one / denom).norm())
    }

    /// `p.v. ∫_a^b y x ρ(x) / (x − λ) dx`.
    pub fn pv_edge_integral(&self, lambda: T) -> Result<T, MpError> {
        self.pv_edge_integral_with_tol(lambda, T::lit(PV_TOL))
    }

    /// As [`pv_edge_integral`](Self::pv_edge_integral) with an explicit absolute error target.
    ///
    /// Off the open support the integral is ordinary (at the edges the
    /// integrand only has an `|x − λ|^{-1/2}` singularity). Inside, the
    /// integral is split into two outer pieces and a symmetric window
    /// `|x − λ| < δ` whose two halves are paired, `∫_ε^δ (f(λ+t) − f(λ−t))/t dt`,
    /// and the excision `ε → 0` is Richardson-extrapolated.
    pub fn pv_edge_integral_with_tol(&self, lambda: T, tol: T) -> Result<T, MpError> {
        let (a, b) = (self.a, self.b);
        let inner_tol = tol * T::lit(1e-4);
        if lambda <= a || lambda >= b {
            let w = b - a;
            let shift = a - lambda;
            let r = integrate(
                |phi: T| {
                    let (s, c) = phi.sin_cos();
                    let gap = shift + w * s * s;
                    w * w * s * s * c * c / (T::PI() * gap)
                },
                T::zero(),
                T::FRAC_PI_2(),
                inner_tol,
                T::zero(),
            )?;
            return Ok(r.value);
        }
        // y x ρ(x) = √((b − x)(x − a)) / 2π
        let numer = |x: T| ((b - x) * (x - a)).max(T::zero()).sqrt() / (T::two() * T::PI());
        let delta = (lambda - a).min(b - lambda) * T::half();
        let left = integrate_sqrt_endpoints(|x| numer(x) / (x - lambda), a, lambda - delta, inner_tol, T::zero())?;
        let right = integrate_sqrt_endpoints(|x| numer(x) / (x - lambda), lambda + delta, b, inner_tol, T::zero())?;
        let window = |eps: T| {
            integrate(
                |t: T| (numer(lambda + t) - numer(lambda - t)) / t,
                eps,
                delta,
                inner_tol,
                T::zero(),
            )
            .map(|r| r.value)
        };
        let eighth = delta / T::lit(8.0);
        let j0 = window(eighth)?;
        let j1 = window(eighth * T::half())?;
        let j2 = window(eighth * T::lit(0.25))?;
        // J(ε) = J(0) − c₁ε − c₃ε³ − …
        let r0 = T::two() * j1 - j0;
        let r1 = T::two() * j2 - j1;
        let extrapolated = (T::lit(8.0) * r1 - r0) / T::lit(7.0);
        Ok(left.value + right.value + extrapolated)
    }
}
