//! Exact arithmetic in real quadratic fields `Q(√D)`.
//!
//! The moment-matching constructions produce atoms such as
//! `(m3 ± √(m3² + 4)) / 2` and `±√3`; their moments are rational, but only
//! exact arithmetic on the atoms shows it. A [`Surd`] is `r + s√D` with
//! rational `r`, `s` and a square-free-ish integer radicand `D`. Values with
//! different radicands combine only when one of them is rational or the
//! radicands differ by a rational square; otherwise the checked operations
//! return `None`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    rational: BigRational,
    irrational: BigRational,
    /// `1` exactly when `irrational` is zero.
    radicand: BigInt,
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

impl Surd {
    pub fn from_rational(q: BigRational) -> Self {
        Self { rational: q, irrational: BigRational::zero(), radicand: BigInt::one() }
    }

    pub fn from_integer(k: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(k)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Self::from_rational)
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    /// `√q` for rational `q ≥ 0`.
    pub fn sqrt_of(q: &BigRational) -> Option<Self> {
        if q.is_negative() {
            return None;
        }
        // √(a/b) = √(a·b) / b
        let prod = q.numer() * q.denom();
        let (outside, inside) = extract_square(&prod);
        let coeff = BigRational::new(outside, q.denom().clone());
        Some(Self::from_parts(BigRational::zero(), coeff, inside))
    }

    /// `r + s√D`; `D` must be positive.
    pub fn from_parts(rational: BigRational, irrational: BigRational, radicand: BigInt) -> Self {
        assert!(radicand.is_positive(), "radicand must be positive");
        let (outside, inside) = extract_square(&radicand);
        let mut s = Self { rational, irrational: irrational * BigRational::from_integer(outside), radicand: inside };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if self.radicand.is_one() {
            self.rational = &self.rational + &self.irrational;
            self.irrational = BigRational::zero();
        }
        if self.irrational.is_zero() {
            self.radicand = BigInt::one();
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.irrational
    }

    pub fn radicand(&self) -> &BigInt {
        &self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_zero()
    }

    /// Nearest `f64`, computed without cancellation when the two parts have
    /// opposite signs.
    pub fn to_f64(&self) -> f64 {
        let r = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.is_rational() {
            return r;
        }
        let root = radicand_sqrt_f64(&self.radicand);
        let s = self.irrational.to_f64().unwrap_or(f64::NAN) * root;
        if r == 0.0 || (r > 0.0) == (s > 0.0) {
            return r + s;
        }
        // r + s = (r² − s²) / (r − s), with r² − s² exact
        let norm = &self.rational * &self.rational
            - &self.irrational * &self.irrational * BigRational::from_integer(self.radicand.clone());
        norm.to_f64().unwrap_or(f64::NAN) / (r - s)
    }

    pub fn signum(&self) -> Ordering {
        if self.is_rational() {
            return self.rational.cmp(&BigRational::zero());
        }
        let rs = self.rational.cmp(&BigRational::zero());
        let ss = self.irrational.cmp(&BigRational::zero());
        if rs == ss || rs == Ordering::Equal {
            return ss;
        }
        // opposite signs: compare r² with s²D
        let r2 = &self.rational * &self.rational;
        let s2d = &self.irrational * &self.irrational * BigRational::from_integer(self.radicand.clone());
        match r2.cmp(&s2d) {
            Ordering::Greater => rs,
            Ordering::Less => ss,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn neg(&self) -> Self {
        Self { rational: -&self.rational, irrational: -&self.irrational, radicand: self.radicand.clone() }
    }

    /// Both operands over a common radicand, if one exists.
    fn align(&self, other: &Self) -> Option<(BigRational, BigRational, BigRational, BigRational, BigInt)> {
        if self.radicand == other.radicand || other.is_rational() {
            return Some((
                self.rational.clone(),
                self.irrational.clone(),
                other.rational.clone(),
                other.irrational.clone(),
                self.radicand.clone(),
            ));
        }
        if self.is_rational() {
            return Some((
                self.rational.clone(),
                BigRational::zero(),
                other.rational.clone(),
                other.irrational.clone(),
                other.radicand.clone(),
            ));
        }
        // √D₂ = √(D₁D₂)/D₁ · √D₁ when D₁D₂ is a perfect square
        let prod = &self.radicand * &other.radicand;
        let root = prod.sqrt();
        if &root * &root != prod {
            return None;
        }
        let factor = BigRational::new(root, self.radicand.clone());
        Some((
            self.rational.clone(),
            self.irrational.clone(),
            other.rational.clone(),
            &other.irrational * factor,
            self.radicand.clone(),
        ))
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let (a, b, c, d, rad) = self.align(other)?;
        let mut s = Self { rational: a + c, irrational: b + d, radicand: rad };
        s.normalize();
        Some(s)
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        let (a, b, c, d, rad) = self.align(other)?;
        let dq = BigRational::from_integer(rad.clone());
        let mut s = Self { rational: &a * &c + &b * &d * dq, irrational: a * d + b * c, radicand: rad };
        s.normalize();
        Some(s)
    }

    /// `None` on division by zero or incompatible radicands.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        // multiply by the conjugate: 1/(c + d√D) = (c − d√D)/(c² − d²D)
        let conj = Self {
            rational: other.rational.clone(),
            irrational: -&other.irrational,
            radicand: other.radicand.clone(),
        };
        let norm = &other.rational * &other.rational
            - &other.irrational * &other.irrational * BigRational::from_integer(other.radicand.clone());
        let num = self.checked_mul(&conj)?;
        let mut s = Self { rational: num.rational / &norm, irrational: num.irrational / norm, radicand: num.radicand };
        s.normalize();
        Some(s)
    }

    pub fn checked_pow(&self, k: u32) -> Option<Self> {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.checked_mul(self)?;
        }
        Some(acc)
    }
}

/// Splits `n > 0` as `outside² · inside`, pulling out small prime squares and
/// detecting a perfect-square remainder.
fn extract_square(n: &BigInt) -> (BigInt, BigInt) {
    let mut inside = n.abs();
    let mut outside = BigInt::one();
    if inside.is_zero() {
        return (BigInt::zero(), BigInt::one());
    }
    for &p in &SMALL_PRIMES {
        let sq = BigInt::from(p * p);
        while (&inside % &sq).is_zero() {
            inside /= &sq;
            outside *= p;
        }
    }
    let root = inside.sqrt();
    if &root * &root == inside {
        outside *= root;
        inside = BigInt::one();
    }
    (outside, inside)
}

fn radicand_sqrt_f64(d: &BigInt) -> f64 {
    match d.to_f64() {
        Some(x) if x.is_finite() && x < 9.0e15 => x.sqrt(),
        _ => {
            // beyond exact f64 integers: split off the integer square root first
            let r = d.sqrt();
            let rem = d - &r * &r;
            let rf = r.to_f64().unwrap_or(f64::INFINITY);
            rf + rem.to_f64().unwrap_or(0.0) / (2.0 * rf)
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.rational)
        } else {
            write!(f, "{} + {}*sqrt({})", self.rational, self.irrational, self.radicand)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {0:?} as r + s*sqrt(D)")]
pub struct ParseSurdError(pub String);

/// Exact value of a decimal literal such as `-0.125` or `2.5e-3`.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("0{int}{frac}").parse().ok()?;
    let shift = exponent.checked_sub(i32::try_from(frac.len()).ok()?)?;
    let ten = BigInt::from(10);
    let mut q = if shift >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, shift.unsigned_abs() as usize))
    };
    if negative {
        q = -q;
    }
    Some(q)
}

/// Decimal literal or [`Surd`] display form.
pub fn parse_exact(s: &str) -> Result<Surd, ParseSurdError> {
    match parse_decimal(s) {
        Some(q) => Ok(Surd::from_rational(q)),
        None => s.parse(),
    }
}

impl FromStr for Surd {
    type Err = ParseSurdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseSurdError(s.to_string());
        let s = s.trim();
        let rat = |t: &str| BigRational::from_str(t.trim()).map_err(|_| err());
        match s.split_once(" + ") {
            None => Ok(Self::from_rational(rat(s)?)),
            Some((r, rest)) => {
                let (coeff, tail) = rest.split_once("*sqrt(").ok_or_else(err)?;
                let rad = tail.strip_suffix(')').ok_or_else(err)?;
                let radicand = BigInt::from_str(rad.trim()).map_err(|_| err())?;
                if !radicand.is_positive() {
                    return Err(err());
                }
                Ok(Self::from_parts(rat(r)?, rat(coeff)?, radicand))
            }
        }
    }
}

/// Values that the moment recursions can be evaluated in: `f64` always
/// succeeds, [`Surd`] fails on incompatible radicands.
pub(crate) trait MomentField: Clone + Sized {
    fn from_surd(s: &Surd) -> Option<Self>;
    fn add(&self, other: &Self) -> Option<Self>;
    fn mul(&self, other: &Self) -> Option<Self>;
    fn div(&self, other: &Self) -> Option<Self>;
    fn is_zero(&self) -> bool;

    fn zero() -> Self {
        Self::from_surd(&Surd::zero()).expect("zero is representable")
    }

    fn one() -> Self {
        Self::from_surd(&Surd::one()).expect("one is representable")
    }

    fn pow(&self, k: u32) -> Option<Self> {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Some(acc)
    }
}

impl MomentField for f64 {
    fn from_surd(s: &Surd) -> Option<Self> {
        Some(s.to_f64())
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn div(&self, other: &Self) -> Option<Self> {
        Some(self / other)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl MomentField for Surd {
    fn from_surd(s: &Surd) -> Option<Self> {
        Some(s.clone())
    }
    fn add(&self, other: &Self) -> Option<Self> {
        self.checked_add(other)
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        self.checked_mul(other)
    }
    fn div(&self, other: &Self) -> Option<Self> {
        self.checked_div(other)
    }
    fn is_zero(&self) -> bool {
        Surd::is_zero(self)
    }
}
