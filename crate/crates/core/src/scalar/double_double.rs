//! Double-double real built on [`TwoFloat`].
//!
//! `TwoFloat` 0.8 divides with `f64` accuracy and converts `f64` through an
//! integer in `FromPrimitive`; this wrapper delegates everything else and
//! fixes those two.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};
use twofloat::TwoFloat;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble(pub TwoFloat);

impl DoubleDouble {
    /// `2^-104`.
    pub const UNIT_ROUNDOFF: f64 = f64::EPSILON * f64::EPSILON / 4.0;

    #[inline]
    pub fn new(x: f64) -> Self {
        DoubleDouble(<TwoFloat as From<f64>>::from(x))
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.0.hi()
    }
}

impl From<f64> for DoubleDouble {
    #[inline]
    fn from(x: f64) -> Self {
        DoubleDouble::new(x)
    }
}

impl PartialOrd for DoubleDouble {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $atr:ident, $af:ident) => {
        impl $tr for DoubleDouble {
            type Output = Self;
            #[inline]
            fn $f(self, rhs: Self) -> Self {
                DoubleDouble($tr::$f(self.0, rhs.0))
            }
        }
        impl $atr for DoubleDouble {
            #[inline]
            fn $af(&mut self, rhs: Self) {
                *self = $tr::$f(*self, rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Rem, rem, RemAssign, rem_assign);

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        // one Newton step on the quotient: q + (a − q b) / b
        let q = self.0 / rhs.0;
        if !q.is_valid() {
            return DoubleDouble(q);
        }
        let r = self.0 - q * rhs.0;
        DoubleDouble(q + r / rhs.0)
    }
}

impl DivAssign for DoubleDouble {
    #[inline]
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        DoubleDouble(-self.0)
    }
}

impl Zero for DoubleDouble {
    #[inline]
    fn zero() -> Self {
        DoubleDouble::new(0.0)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        self.0.hi() == 0.0
    }
}

impl One for DoubleDouble {
    #[inline]
    fn one() -> Self {
        DoubleDouble::new(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = <TwoFloat as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        TwoFloat::from_str_radix(s, radix).map(DoubleDouble)
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        self.0.to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.0.hi() + self.0.lo())
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        TwoFloat::from_i64(n).map(DoubleDouble)
    }
    fn from_u64(n: u64) -> Option<Self> {
        TwoFloat::from_u64(n).map(DoubleDouble)
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(DoubleDouble::new(x))
    }
    fn from_f32(x: f32) -> Option<Self> {
        Some(DoubleDouble::new(x as f64))
    }
}

impl NumCast for DoubleDouble {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(DoubleDouble::new)
    }
}

macro_rules! consts {
    ($($name:ident),*) => {
        $(
            #[inline]
            fn $name() -> Self {
                DoubleDouble(<TwoFloat as FloatConst>::$name())
            }
        )*
    };
}

impl FloatConst for DoubleDouble {
    consts!(
        E, FRAC_1_PI, FRAC_1_SQRT_2, FRAC_2_PI, FRAC_2_SQRT_PI, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, FRAC_PI_8,
        LN_10, LN_2, LOG10_E, LOG2_E, PI, SQRT_2
    );
}

macro_rules! unary {
    ($($name:ident),*) => {
        $(
            #[inline]
            fn $name(self) -> Self {
                DoubleDouble(Float::$name(self.0))
            }
        )*
    };
}

macro_rules! nullary {
    ($($name:ident),*) => {
        $(
            #[inline]
            fn $name() -> Self {
                DoubleDouble(<TwoFloat as Float>::$name())
            }
        )*
    };
}

macro_rules! predicate {
    ($($name:ident),*) => {
        $(
            #[inline]
            fn $name(self) -> bool {
                Float::$name(self.0)
            }
        )*
    };
}

impl Float for DoubleDouble {
    nullary!(nan, infinity, neg_infinity, neg_zero, min_value, min_positive_value, max_value);
    predicate!(is_nan, is_infinite, is_finite, is_normal, is_sign_positive, is_sign_negative);
    unary!(
        floor, ceil, round, trunc, fract, abs, signum, sqrt, exp, exp2, ln, log2, log10, cbrt, sin, cos, tan, asin, acos,
        atan, exp_m1, ln_1p, sinh, cosh, tanh, asinh, acosh, atanh
    );

    fn epsilon() -> Self {
        DoubleDouble::new(Self::UNIT_ROUNDOFF)
    }

    fn classify(self) -> FpCategory {
        Float::classify(self.0)
    }

    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }

    fn powf(self, n: Self) -> Self {
        DoubleDouble(Float::powf(self.0, n.0))
    }

    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }

    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }

    #[allow(deprecated)]
    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Self::zero()
        }
    }

    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }

    fn atan2(self, other: Self) -> Self {
        DoubleDouble(Float::atan2(self.0, other.0))
    }

    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        Float::integer_decode(self.0)
    }
}
