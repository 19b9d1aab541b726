//! Scalar abstractions.
//!
//! Every numerical routine in the crate is written against [`Real`] (a real
//! floating point type) or [`Scalar`] (a real or complex field element whose
//! modulus lives in a [`Real`]). `f32`, `f64`, `Complex<f32>` and
//! `Complex<f64>` implement both as appropriate, as do [`DoubleDouble`] and
//! `Complex<DoubleDouble>`, used to re-evaluate ill-conditioned checks.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, One, Zero};

mod double_double;
pub use double_double::DoubleDouble;

/// Real floating point scalar.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent finite `f64` values,
    /// which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative rounding error of the arithmetic; differs from
    /// [`Float::epsilon`] for types whose epsilon is not their precision.
    #[inline]
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

impl Real for DoubleDouble {
    #[inline]
    fn unit_roundoff() -> Self {
        DoubleDouble::new(DoubleDouble::UNIT_ROUNDOFF)
    }
}

/// A real or complex field element.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    type Real: Real;

    const IS_COMPLEX: bool;

    fn from_real(r: Self::Real) -> Self;
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;
    fn conj(self) -> Self;
    /// `|x|²`
    fn abs2(self) -> Self::Real;
    fn scale(self, r: Self::Real) -> Self;

    #[inline]
    fn modulus(self) -> Self::Real {
        if Self::IS_COMPLEX {
            self.re().hypot(self.im())
        } else {
            self.re().abs()
        }
    }

    #[inline]
    fn is_finite(self) -> bool {
        self.re().is_finite() && self.im().is_finite()
    }
}

macro_rules! impl_real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            const IS_COMPLEX: bool = false;

            #[inline]
            fn from_real(r: $t) -> Self {
                r
            }
            #[inline]
            fn from_parts(re: $t, _im: $t) -> Self {
                re
            }
            #[inline]
            fn re(self) -> $t {
                self
            }
            #[inline]
            fn im(self) -> $t {
                <$t>::zero()
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn abs2(self) -> $t {
                self * self
            }
            #[inline]
            fn scale(self, r: $t) -> Self {
                self * r
            }
        }

        impl Scalar for Complex<$t> {
            type Real = $t;
            const IS_COMPLEX: bool = true;

            #[inline]
            fn from_real(r: $t) -> Self {
                Complex::new(r, <$t>::zero())
            }
            #[inline]
            fn from_parts(re: $t, im: $t) -> Self {
                Complex::new(re, im)
            }
            #[inline]
            fn re(self) -> $t {
                self.re
            }
            #[inline]
            fn im(self) -> $t {
                self.im
            }
            #[inline]
            fn conj(self) -> Self {
                Complex::new(self.re, -self.im)
            }
            #[inline]
            fn abs2(self) -> $t {
                self.re * self.re + self.im * self.im
            }
            #[inline]
            fn scale(self, r: $t) -> Self {
                Complex::new(self.re * r, self.im * r)
            }
        }
    };
}

impl_real_scalar!(f32);
impl_real_scalar!(f64);
impl_real_scalar!(DoubleDouble);

/// `Σ conj(x_k) y_k`, with four independent accumulators so the compiler can pipeline.
#[inline]
pub fn dotc<F: Scalar>(x: &[F], y: &[F]) -> F {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [F::zero(); 4];
    let xc = x.chunks_exact(4);
    let yc = y.chunks_exact(4);
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        acc[0] += a[0].conj() * b[0];
        acc[1] += a[1].conj() * b[1];
        acc[2] += a[2].conj() * b[2];
        acc[3] += a[3].conj() * b[3];
    }
    let mut tail = F::zero();
    for (a, b) in xr.iter().zip(yr) {
        tail += a.conj() * *b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `‖x‖²`
#[inline]
pub fn norm2<F: Scalar>(x: &[F]) -> F::Real {
    let mut acc = [F::Real::zero(); 4];
    let chunks = x.chunks_exact(4);
    let rem = chunks.remainder();
    for a in chunks {
        acc[0] += a[0].abs2();
        acc[1] += a[1].abs2();
        acc[2] += a[2].abs2();
        acc[3] += a[3].abs2();
    }
    let mut tail = F::Real::zero();
    for a in rem {
        tail += a.abs2();
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy<F: Scalar>(alpha: F, x: &[F], y: &mut [F]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotc_conjugates_first_argument() {
        let x = [Complex::new(0.0, 1.0), Complex::new(1.0, 0.0)];
        let y = [Complex::new(0.0, 1.0), Complex::new(2.0, 0.0)];
        // conj(i)*i + 1*2 = 1 + 2
        assert_eq!(dotc(&x, &y), Complex::new(3.0, 0.0));
    }

    #[test]
    fn norm2_matches_naive_sum() {
        let x: Vec<f64> = (0..11).map(|k| k as f64 - 4.5).collect();
        let naive: f64 = x.iter().map(|v| v * v).sum();
        assert!((norm2(&x) - naive).abs() < 1e-12);
    }
}
