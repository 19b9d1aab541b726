//! Mixed moments `E[Re(ζ)^m Im(ζ)^l]` for `m + l ≤ 4`.
//!
//! Untruncated laws are handled by a recursion over the spec tree that is
//! generic over [`MomentField`], so the same code yields exact [`Surd`]
//! values and plain `f64` values. Truncated atomic laws are re-evaluated on
//! the surviving atoms; truncated laws with a Gaussian part are integrated
//! numerically and flagged approximate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::exact::{MomentField, Surd};
use super::{Atom, DistributionSpec, Kind, Normalization};
use crate::quadrature::{integrate, integrate_sqrt_endpoints, QuadratureError};

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Moments of `N(0, 1)`.
fn gauss_unit(k: u32) -> Surd {
    match k {
        0 | 2 => Surd::one(),
        4 => Surd::from_integer(3),
        _ => Surd::zero(),
    }
}

/// Moments of `N(0, 1/2)`.
fn gauss_half(k: u32) -> Surd {
    match k {
        0 => Surd::one(),
        2 => Surd::ratio(1, 2),
        4 => Surd::ratio(3, 4),
        _ => Surd::zero(),
    }
}

fn atomic_power_sum<V: MomentField>(atoms: &[Atom], k: u32) -> Option<V> {
    let mut acc = V::zero();
    for a in atoms {
        let x = V::from_surd(&a.value)?;
        let p = V::from_surd(&a.prob)?;
        acc = acc.add(&p.mul(&x.pow(k)?)?)?;
    }
    Some(acc)
}

fn half_root_power<V: MomentField>(k: u32) -> Option<V> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    V::from_surd(&Surd::sqrt_of(&half)?)?.pow(k)
}

/// `E[Re^m Im^l]` of an untruncated law; `None` when the value leaves the
/// field `V` (only possible for [`Surd`]).
pub(crate) fn untruncated<V: MomentField>(kind: &Kind, m: u32, l: u32) -> Option<V> {
    match kind {
        Kind::GaussianReal => {
            if l > 0 {
                return Some(V::zero());
            }
            V::from_surd(&gauss_unit(m))
        }
        Kind::GaussianComplex => V::from_surd(&gauss_half(m))?.mul(&V::from_surd(&gauss_half(l))?),
        Kind::Rademacher => {
            if l > 0 {
                return Some(V::zero());
            }
            V::from_surd(&if m.is_multiple_of(2) { Surd::one() } else { Surd::zero() })
        }
        Kind::AtomicReal { atoms } => {
            if l > 0 {
                return Some(V::zero());
            }
            atomic_power_sum(atoms, m)
        }
        Kind::AtomicComplex { re, im } => {
            let a: V = atomic_power_sum(re, m)?;
            let b: V = atomic_power_sum(im, l)?;
            a.mul(&b)?.mul(&half_root_power(m + l)?)
        }
        Kind::GaussianDivisible { t, base } => divisible(*t, base, m, l),
        Kind::Truncated { .. } => None,
    }
}

fn divisible<V: MomentField>(t: f64, base: &DistributionSpec, m: u32, l: u32) -> Option<V> {
    let t_exact = BigRational::from_float(t)?;
    let alpha = V::from_surd(&Surd::sqrt_of(&(BigRational::one() - &t_exact))?)?;
    let beta = V::from_surd(&Surd::sqrt_of(&t_exact)?)?;
    let mut acc = V::zero();
    match base.normalization() {
        Normalization::RNormalized => {
            if l > 0 {
                return Some(V::zero());
            }
            for j in 0..=m {
                let g = gauss_unit(m - j);
                if g.is_zero() {
                    continue;
                }
                let coeff = V::from_surd(&g.checked_mul(&Surd::from_integer(binomial(m, j)))?)?;
                let x: V = untruncated(&base.kind, j, 0)?;
                if x.is_zero() {
                    continue;
                }
                let term = coeff.mul(&x)?.mul(&alpha.pow(j)?)?.mul(&beta.pow(m - j)?)?;
                acc = acc.add(&term)?;
            }
        }
        Normalization::CNormalized => {
            for j in 0..=m {
                for k in 0..=l {
                    let g = gauss_half(m - j).checked_mul(&gauss_half(l - k))?;
                    if g.is_zero() {
                        continue;
                    }
                    let c = Surd::from_integer(binomial(m, j) * binomial(l, k));
                    let coeff = V::from_surd(&g.checked_mul(&c)?)?;
                    let x: V = untruncated(&base.kind, j, k)?;
                    if x.is_zero() {
                        continue;
                    }
                    let term = coeff.mul(&x)?.mul(&alpha.pow(j + k)?)?.mul(&beta.pow(m - j + l - k)?)?;
                    acc = acc.add(&term)?;
                }
            }
        }
    }
    Some(acc)
}

/// Atoms of a purely atomic law as `(weight, re, im)` with the complex
/// scaling applied; `None` if the law has a continuous part.
fn joint_atoms(kind: &Kind) -> Option<Vec<(Surd, Surd, Surd)>> {
    match kind {
        Kind::Rademacher => Some(vec![
            (Surd::ratio(1, 2), Surd::from_integer(-1), Surd::zero()),
            (Surd::ratio(1, 2), Surd::one(), Surd::zero()),
        ]),
        Kind::AtomicReal { atoms } => {
            Some(atoms.iter().map(|a| (a.prob.clone(), a.value.clone(), Surd::zero())).collect())
        }
        Kind::AtomicComplex { re, im } => {
            let mut out = Vec::with_capacity(re.len() * im.len());
            for x in re {
                for y in im {
                    out.push((x.prob.checked_mul(&y.prob)?, x.value.clone(), y.value.clone()));
                }
            }
            Some(out)
        }
        _ => None,
    }
}

/// Exact moments of an atomic law conditioned on `|ζ| ≤ bound`.
pub(crate) fn truncated_atomic<V: MomentField>(base: &DistributionSpec, bound: f64, m: u32, l: u32) -> Option<V> {
    let atoms = joint_atoms(&base.kind)?;
    let complex = base.normalization() == Normalization::CNormalized;
    let keep = |re: &Surd, im: &Surd| {
        let (x, y) = (re.to_f64(), im.to_f64());
        let r2 = if complex { (x * x + y * y) / 2.0 } else { x * x };
        r2 <= bound * bound
    };
    let mut mass = V::zero();
    let mut acc = V::zero();
    for (w, re, im) in &atoms {
        if !keep(re, im) {
            continue;
        }
        let w = V::from_surd(w)?;
        mass = mass.add(&w)?;
        let x = V::from_surd(re)?.pow(m)?;
        let y = V::from_surd(im)?.pow(l)?;
        acc = acc.add(&w.mul(&x)?.mul(&y)?)?;
    }
    if mass.is_zero() {
        return None;
    }
    let scaled = if complex { acc.mul(&half_root_power(m + l)?)? } else { acc };
    scaled.div(&mass)
}

/// Fraction of an atomic law's mass inside `|ζ| ≤ bound`, or `None` if the
/// law is not atomic.
pub(crate) fn atomic_mass_inside(base: &DistributionSpec, bound: f64) -> Option<f64> {
    let atoms = joint_atoms(&base.kind)?;
    let complex = base.normalization() == Normalization::CNormalized;
    Some(
        atoms
            .iter()
            .filter(|(_, re, im)| {
                let (x, y) = (re.to_f64(), im.to_f64());
                let r2 = if complex { (x * x + y * y) / 2.0 } else { x * x };
                r2 <= bound * bound
            })
            .map(|(w, _, _)| w.to_f64())
            .sum(),
    )
}

/// One Gaussian (or point) component of a law: mean `(re, im)` and
/// per-coordinate variance.
#[derive(Debug, Clone, Copy)]
struct Component {
    weight: f64,
    re: f64,
    im: f64,
    var: f64,
}

fn components(spec: &DistributionSpec) -> Vec<Component> {
    let point = |weight, re, im| Component { weight, re, im, var: 0.0 };
    match &spec.kind {
        Kind::GaussianReal => vec![Component { weight: 1.0, re: 0.0, im: 0.0, var: 1.0 }],
        Kind::GaussianComplex => vec![Component { weight: 1.0, re: 0.0, im: 0.0, var: 0.5 }],
        Kind::Rademacher | Kind::AtomicReal { .. } | Kind::AtomicComplex { .. } => {
            let scale = if spec.normalization() == Normalization::CNormalized { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
            joint_atoms(&spec.kind)
                .unwrap_or_default()
                .iter()
                .map(|(w, x, y)| point(w.to_f64(), scale * x.to_f64(), scale * y.to_f64()))
                .collect()
        }
        Kind::GaussianDivisible { t, base } => {
            let alpha = (1.0 - t).sqrt();
            let g = if spec.normalization() == Normalization::CNormalized { 0.5 } else { 1.0 };
            components(base)
                .into_iter()
                .map(|c| Component {
                    weight: c.weight,
                    re: alpha * c.re,
                    im: alpha * c.im,
                    var: (1.0 - t) * c.var + t * g,
                })
                .collect()
        }
        Kind::Truncated { base, .. } => components(base),
    }
}

const QUAD_ABS: f64 = 1e-14;
const QUAD_REL: f64 = 1e-12;
/// Gaussian components are integrated over `mean ± WINDOW·σ`.
const WINDOW: f64 = 40.0;

fn gauss_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

fn clip(lo: f64, hi: f64, mean: f64, sd: f64) -> Option<(f64, f64)> {
    let a = lo.max(mean - WINDOW * sd);
    let b = hi.min(mean + WINDOW * sd);
    (a < b).then_some((a, b))
}

/// `E[Re^m Im^l 1{|ζ| ≤ K}]` for one component.
fn component_integral(c: &Component, complex: bool, bound: f64, m: i32, l: i32) -> Result<f64, QuadratureError> {
    if c.var == 0.0 {
        let inside = c.re * c.re + c.im * c.im <= bound * bound;
        return Ok(if inside { c.re.powi(m) * c.im.powi(l) } else { 0.0 });
    }
    let sd = c.var.sqrt();
    if !complex {
        if l > 0 {
            return Ok(0.0);
        }
        let Some((a, b)) = clip(-bound, bound, c.re, sd) else {
            return Ok(0.0);
        };
        return Ok(integrate(|x: f64| x.powi(m) * gauss_pdf(x, c.re, c.var), a, b, QUAD_ABS, QUAD_REL)?.value);
    }
    let Some((a, b)) = clip(-bound, bound, c.re, sd) else {
        return Ok(0.0);
    };
    let mut failure = None;
    let outer = |x: f64| {
        let h = (bound * bound - x * x).max(0.0).sqrt();
        let Some((lo, hi)) = clip(-h, h, c.im, sd) else {
            return 0.0;
        };
        match integrate(|y: f64| y.powi(l) * gauss_pdf(y, c.im, c.var), lo, hi, QUAD_ABS, QUAD_REL) {
            Ok(r) => x.powi(m) * gauss_pdf(x, c.re, c.var) * r.value,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        }
    };
    let r = integrate_sqrt_endpoints(outer, a, b, QUAD_ABS, QUAD_REL);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// Moments of `base` conditioned on `|ζ| ≤ bound`, by quadrature; the
/// result is indexed like [`super::MomentTable`] entries, `(m, l, value)`.
pub(crate) fn truncated_numeric(base: &DistributionSpec, bound: f64) -> Result<Vec<(u32, u32, f64)>, QuadratureError> {
    let comps = components(base);
    let complex = base.normalization() == Normalization::CNormalized;
    let raw = |m: i32, l: i32| -> Result<f64, QuadratureError> {
        let mut s = 0.0;
        for c in &comps {
            s += c.weight * component_integral(c, complex, bound, m, l)?;
        }
        Ok(s)
    };
    let mass = raw(0, 0)?;
    let mut out = Vec::new();
    for (m, l) in super::moment_indices() {
        let v = if (m, l) == (0, 0) { 1.0 } else { raw(m as i32, l as i32)? / mass };
        out.push((m, l, v));
    }
    Ok(out)
}

/// Mass of `base` inside `|ζ| ≤ bound`, by quadrature.
pub(crate) fn mass_inside(base: &DistributionSpec, bound: f64) -> Result<f64, QuadratureError> {
    let complex = base.normalization() == Normalization::CNormalized;
    let mut s = 0.0;
    for c in &components(base) {
        s += c.weight * component_integral(c, complex, bound, 0, 0)?;
    }
    Ok(s)
}
