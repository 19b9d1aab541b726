//! Entry distributions with mean zero and unit variance, their exact moment
//! tables, the moment-matching constructions and reproducible sampling.
//!
//! A [`DistributionSpec`] is immutable once built and cheap to clone. Its
//! moment table holds `E[Re(ζ)^m Im(ζ)^l]` for `m + l ≤ 4`, exact where the
//! law allows it.
//!
//! Specs are addressable by name ([`DistributionSpec::from_name`]):
//!
//! | name | law |
//! |------|-----|
//! | `gaussian`, `normal` | real `N(0, 1)` |
//! | `gaussian-complex` | `Re`, `Im` independent `N(0, 1/2)` |
//! | `bernoulli`, `rademacher` | `±1` with probability `1/2` |
//! | `bernoulli-complex` | `(±1 ± i)/√2` |
//! | `gauss4` | `{−√3, 0, √3}` with probabilities `1/6, 2/3, 1/6` |
//! | `match3:m3=<x>` | the two-atom law with third moment `x` |
//! | `atomic:<v>@<p>,<v>@<p>,...` | explicit real atoms |
//! | `gauss-div:t=<t>:base=<name>` | `(1−t)^{1/2} ζ' + t^{1/2} ζ''` |
//! | `trunc:K=<k>:base=<name>` | `base` conditioned on `|ζ| ≤ k` |
//! | `trunc:C0=<c>:n=<n>:base=<name>` | the same with `k = n^{10/c}` |
//!
//! A name starting with `{` is read as the JSON form.

mod exact;
mod moments;
mod rng;
mod sample;

pub use exact::{ParseSurdError, Surd};
pub use rng::{mix64, CounterRng};
pub use sample::{sample_entries, sample_matrix, Entries, MatrixSample, Sampler};

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::quadrature::QuadratureError;

/// Tolerance for the normalization checks on probabilities and moments.
pub const MOMENT_TOL: f64 = 1e-12;
/// Highest supported moment order `m + l`.
pub const MAX_ORDER: u32 = 4;
/// Draws after which rejection sampling of a truncated law gives up.
pub const REJECTION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("moments of order {0} are not supported (maximum 4)")]
    UnsupportedOrder(u32),
    #[error("{0}")]
    Domain(String),
    #[error("invalid atoms: {0}")]
    Atoms(String),
    #[error("law is not standardized: {0}")]
    Standardization(String),
    #[error("shape {p}x{n} is invalid, need 1 <= p <= n")]
    Shape { p: usize, n: usize },
    #[error("rejection sampling gave up after {0} draws")]
    RejectionLimit(u64),
    #[error("unknown ensemble name {0:?}")]
    UnknownName(String),
    #[error("malformed ensemble {0}")]
    Parse(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Real, mean 0, variance 1.
    RNormalized,
    /// Complex with `E Re² = E Im² = 1/2` and `E Re·Im = 0`.
    CNormalized,
}

/// A point mass of an atomic law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub value: Surd,
    pub prob: Surd,
}

impl Atom {
    pub fn new(value: Surd, prob: Surd) -> Self {
        Self { value, prob }
    }

    /// Exact atom from floating point data.
    pub fn from_f64(value: f64, prob: f64) -> Result<Self, EnsembleError> {
        let v = Surd::from_f64(value).ok_or_else(|| EnsembleError::Atoms(format!("non-finite value {value}")))?;
        let p = Surd::from_f64(prob).ok_or_else(|| EnsembleError::Atoms(format!("non-finite probability {prob}")))?;
        Ok(Self::new(v, p))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRepr {
    value: f64,
    prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<ExactAtomRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactAtomRepr {
    value: String,
    prob: String,
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let exact_f64 = |x: &Surd| x.is_rational() && Surd::from_f64(x.to_f64()).as_ref() == Some(x);
        let exact = if exact_f64(&self.value) && exact_f64(&self.prob) {
            None
        } else {
            Some(ExactAtomRepr { value: self.value.to_string(), prob: self.prob.to_string() })
        };
        AtomRepr { value: self.value.to_f64(), prob: self.prob.to_f64(), exact }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = AtomRepr::deserialize(d)?;
        match r.exact {
            None => Atom::from_f64(r.value, r.prob).map_err(D::Error::custom),
            Some(e) => {
                let value = Surd::from_str(&e.value).map_err(D::Error::custom)?;
                let prob = Surd::from_str(&e.prob).map_err(D::Error::custom)?;
                if (value.to_f64() - r.value).abs() > MOMENT_TOL * (1.0 + r.value.abs())
                    || (prob.to_f64() - r.prob).abs() > MOMENT_TOL
                {
                    return Err(D::Error::custom("exact atom disagrees with its floating point value"));
                }
                Ok(Atom::new(value, prob))
            }
        }
    }
}

/// The shape of an entry law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kind {
    GaussianReal,
    GaussianComplex,
    Rademacher,
    AtomicReal { atoms: Vec<Atom> },
    /// Product law `Re ⊗ Im`; both lists are unit-variance real laws that are
    /// scaled by `1/√2`.
    AtomicComplex { re: Vec<Atom>, im: Vec<Atom> },
    GaussianDivisible { t: f64, base: Box<DistributionSpec> },
    /// `base` conditioned on `|ζ| ≤ bound`.
    Truncated { base: Box<DistributionSpec>, bound: f64 },
}

/// One entry of a [`MomentTable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEntry {
    pub m: u32,
    pub l: u32,
    pub value: f64,
    /// Exact value where the law admits one.
    #[serde(serialize_with = "serialize_exact")]
    pub exact: Option<Surd>,
    /// Computed by numerical quadrature.
    pub approximate: bool,
}

fn serialize_exact<S: Serializer>(x: &Option<Surd>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// `E[Re(ζ)^m Im(ζ)^l]` for all `m + l ≤ 4`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    entries: Vec<MomentEntry>,
}

pub(crate) fn moment_indices() -> impl Iterator<Item = (u32, u32)> {
    (0..=MAX_ORDER).flat_map(|k| (0..=k).map(move |l| (k - l, l)))
}

impl MomentTable {
    pub fn get(&self, m: u32, l: u32) -> Option<&MomentEntry> {
        self.entries.iter().find(|e| e.m == m && e.l == l)
    }

    pub fn entries(&self) -> &[MomentEntry] {
        &self.entries
    }

    /// Every entry is exact.
    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|e| e.exact.is_some())
    }

    pub fn is_approximate(&self) -> bool {
        self.entries.iter().any(|e| e.approximate)
    }

    fn value(&self, m: u32, l: u32) -> f64 {
        self.get(m, l).map_or(f64::NAN, |e| e.value)
    }
}

/// An entry law `ζ`.
#[derive(Debug, Clone)]
pub struct DistributionSpec {
    kind: Kind,
    normalization: Normalization,
    label: Option<String>,
    table: MomentTable,
}

impl PartialEq for DistributionSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    #[serde(flatten)]
    kind: Kind,
    normalization: Normalization,
}

impl Serialize for DistributionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SpecRepr { kind: self.kind.clone(), normalization: self.normalization }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = SpecRepr::deserialize(d)?;
        let spec = DistributionSpec::from_kind(r.kind).map_err(D::Error::custom)?;
        if spec.normalization != r.normalization {
            return Err(D::Error::custom(format!(
                "normalization {:?} does not match the law, expected {:?}",
                r.normalization, spec.normalization
            )));
        }
        Ok(spec)
    }
}

fn normalization_of(kind: &Kind) -> Normalization {
    match kind {
        Kind::GaussianReal | Kind::Rademacher | Kind::AtomicReal { .. } => Normalization::RNormalized,
        Kind::GaussianComplex | Kind::AtomicComplex { .. } => Normalization::CNormalized,
        Kind::GaussianDivisible { base, .. } | Kind::Truncated { base, .. } => base.normalization,
    }
}

fn check_atoms(atoms: &[Atom], what: &str) -> Result<(), EnsembleError> {
    if atoms.is_empty() {
        return Err(EnsembleError::Atoms(format!("{what}: no atoms")));
    }
    let mut total = 0.0;
    for a in atoms {
        if a.prob.signum() == std::cmp::Ordering::Less {
            return Err(EnsembleError::Atoms(format!("{what}: negative probability {}", a.prob)));
        }
        if !a.value.to_f64().is_finite() {
            return Err(EnsembleError::Atoms(format!("{what}: non-finite atom")));
        }
        total += a.prob.to_f64();
    }
    if (total - 1.0).abs() > MOMENT_TOL {
        return Err(EnsembleError::Atoms(format!("{what}: probabilities sum to {total}")));
    }
    Ok(())
}

fn check_unit_variance(atoms: &[Atom], what: &str) -> Result<(), EnsembleError> {
    let m1: f64 = atoms.iter().map(|a| a.prob.to_f64() * a.value.to_f64()).sum();
    let m2: f64 = atoms.iter().map(|a| a.prob.to_f64() * a.value.to_f64().powi(2)).sum();
    if m1.abs() > MOMENT_TOL || (m2 - 1.0).abs() > MOMENT_TOL {
        return Err(EnsembleError::Standardization(format!("{what}: mean {m1}, variance {m2}")));
    }
    Ok(())
}

impl DistributionSpec {
    /// Validates `kind` and computes its moment table.
    pub fn from_kind(kind: Kind) -> Result<Self, EnsembleError> {
        let kind = match kind {
            Kind::AtomicReal { atoms } => {
                check_atoms(&atoms, "atomic_real")?;
                Kind::AtomicReal { atoms }
            }
            Kind::AtomicComplex { re, im } => {
                check_atoms(&re, "atomic_complex re")?;
                check_atoms(&im, "atomic_complex im")?;
                check_unit_variance(&re, "atomic_complex re")?;
                check_unit_variance(&im, "atomic_complex im")?;
                Kind::AtomicComplex { re, im }
            }
            Kind::GaussianDivisible { t, base } => {
                if !(t > 0.0 && t < 1.0) {
                    return Err(EnsembleError::Domain(format!("gaussian divisible t must lie in (0, 1), got {t}")));
                }
                if matches!(base.kind, Kind::Truncated { .. }) {
                    return Err(EnsembleError::Domain("gaussian divisible base must not be truncated".into()));
                }
                Kind::GaussianDivisible { t, base }
            }
            Kind::Truncated { base, bound } => {
                if !(bound > 0.0) {
                    return Err(EnsembleError::Domain(format!("truncation bound must be positive, got {bound}")));
                }
                match base.kind {
                    // truncating twice keeps the tighter bound
                    Kind::Truncated { base: inner, bound: b0 } => Kind::Truncated { base: inner, bound: bound.min(b0) },
                    _ => Kind::Truncated { base, bound },
                }
            }
            k => k,
        };
        let normalization = normalization_of(&kind);
        let table = build_table(&kind)?;
        let spec = Self { kind, normalization, label: None, table };
        spec.check_standardized()?;
        Ok(spec)
    }

    fn check_standardized(&self) -> Result<(), EnsembleError> {
        if matches!(self.kind, Kind::Truncated { .. }) {
            // conditioning changes the variance; the table records the truth
            return Ok(());
        }
        let t = &self.table;
        let (m10, m01, m20, m02, m11) = (t.value(1, 0), t.value(0, 1), t.value(2, 0), t.value(0, 2), t.value(1, 1));
        let bad = |x: f64, target: f64| !((x - target).abs() <= MOMENT_TOL);
        if bad(m10, 0.0) || bad(m01, 0.0) || bad(m20 + m02, 1.0) {
            return Err(EnsembleError::Standardization(format!(
                "E Re = {m10}, E Im = {m01}, E|ζ|² = {}",
                m20 + m02
            )));
        }
        if self.normalization == Normalization::CNormalized && (bad(m20, 0.5) || bad(m02, 0.5) || bad(m11, 0.0)) {
            return Err(EnsembleError::Standardization(format!(
                "E Re² = {m20}, E Im² = {m02}, E Re·Im = {m11}"
            )));
        }
        Ok(())
    }

    fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn gaussian_real() -> Self {
        Self::from_kind(Kind::GaussianReal).expect("standard gaussian is valid")
    }

    pub fn gaussian_complex() -> Self {
        Self::from_kind(Kind::GaussianComplex).expect("complex gaussian is valid")
    }

    pub fn rademacher() -> Self {
        Self::from_kind(Kind::Rademacher).expect("rademacher is valid")
    }

    /// Real atomic law from `(value, probability)` pairs.
    pub fn atomic_real(atoms: &[(f64, f64)]) -> Result<Self, EnsembleError> {
        let atoms = atoms.iter().map(|&(v, p)| Atom::from_f64(v, p)).collect::<Result<_, _>>()?;
        Self::from_kind(Kind::AtomicReal { atoms })
    }

    /// Complex product law; `re` and `im` are unit-variance real laws.
    pub fn atomic_complex(re: Vec<Atom>, im: Vec<Atom>) -> Result<Self, EnsembleError> {
        Self::from_kind(Kind::AtomicComplex { re, im })
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn is_complex(&self) -> bool {
        self.normalization == Normalization::CNormalized
    }

    pub fn moment_table(&self) -> &MomentTable {
        &self.table
    }

    /// The truncation level `K`, if any.
    pub fn bound(&self) -> Option<f64> {
        match self.kind {
            Kind::Truncated { bound, .. } => Some(bound),
            _ => None,
        }
    }

    /// `E[Re(ζ)^m Im(ζ)^l]`.
    pub fn moment(&self, m: u32, l: u32) -> Result<f64, EnsembleError> {
        Ok(self.moment_entry(m, l)?.value)
    }

    pub fn exact_moment(&self, m: u32, l: u32) -> Result<Option<&Surd>, EnsembleError> {
        Ok(self.moment_entry(m, l)?.exact.as_ref())
    }

    fn moment_entry(&self, m: u32, l: u32) -> Result<&MomentEntry, EnsembleError> {
        if m + l > MAX_ORDER {
            return Err(EnsembleError::UnsupportedOrder(m + l));
        }
        Ok(self.table.get(m, l).expect("table covers every order <= 4"))
    }

    /// Name under which [`Self::from_name`] finds this law again.
    pub fn name(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match &self.kind {
            Kind::GaussianReal => "gaussian".into(),
            Kind::GaussianComplex => "gaussian-complex".into(),
            Kind::Rademacher => "bernoulli".into(),
            Kind::AtomicReal { atoms } => format!("atomic:{}", atom_list(atoms)),
            Kind::AtomicComplex { re, im } => format!("atomic-complex:re={}:im={}", atom_list(re), atom_list(im)),
            Kind::GaussianDivisible { t, base } => format!("gauss-div:t={t}:base={}", base.name()),
            Kind::Truncated { base, bound } => format!("trunc:K={bound}:base={}", base.name()),
        }
    }

    /// Resolves a built-in name or a JSON object; see the module docs.
    pub fn from_name(name: &str) -> Result<Self, EnsembleError> {
        let name = name.trim();
        if name.starts_with('{') {
            return serde_json::from_str(name).map_err(|e| EnsembleError::Parse(e.to_string()));
        }
        let (head, rest) = name.split_once(':').unwrap_or((name, ""));
        let params = Params::parse(rest, name)?;
        let spec = match head {
            "gaussian" | "normal" | "gaussian-real" | "gaussian_real" => {
                params.none()?;
                Self::gaussian_real()
            }
            "gaussian-complex" | "gaussian_complex" | "complex-gaussian" => {
                params.none()?;
                Self::gaussian_complex()
            }
            "bernoulli" | "rademacher" => {
                params.none()?;
                Self::rademacher()
            }
            "bernoulli-complex" | "rademacher-complex" => {
                params.none()?;
                let pm = || vec![Atom::new(Surd::from_integer(-1), Surd::ratio(1, 2)), Atom::new(Surd::one(), Surd::ratio(1, 2))];
                Self::atomic_complex(pm(), pm())?.with_label("bernoulli-complex")
            }
            "gauss4" => {
                params.none()?;
                match_fourth_order_gaussian()
            }
            "match3" => {
                let m3 = params.number("m3")?;
                params.only(&["m3"])?;
                match_third_order(m3)?.with_label(name)
            }
            "atomic" => {
                let atoms = parse_atoms(rest)?;
                Self::from_kind(Kind::AtomicReal { atoms })?
            }
            "atomic-complex" => {
                params.only(&["re", "im"])?;
                let re = parse_atoms(params.get("re")?)?;
                let im = parse_atoms(params.get("im")?)?;
                Self::atomic_complex(re, im)?
            }
            "gauss-div" | "gaussian-divisible" => {
                params.only(&["t", "base"])?;
                let t = params.number("t")?;
                let base = Self::from_name(params.get("base")?)?;
                gaussian_divisible(t, &base)?
            }
            "trunc" | "truncated" => {
                params.only(&["K", "C0", "n", "base"])?;
                let base = Self::from_name(params.get("base")?)?;
                if params.has("K") {
                    Self::from_kind(Kind::Truncated { base: Box::new(base), bound: params.number("K")? })?
                } else {
                    let c0 = params.number("C0")?;
                    let n = params.number("n")?;
                    if !(n >= 1.0 && n.fract() == 0.0) {
                        return Err(EnsembleError::Parse(format!("{name}: n must be a positive integer")));
                    }
                    truncate(&base, c0, n as usize)?
                }
            }
            _ => return Err(EnsembleError::UnknownName(name.to_string())),
        };
        Ok(spec)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for DistributionSpec {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_name(s)
    }
}

/// Shortest decimal when it is exact, the exact display form otherwise.
fn exact_text(x: &Surd) -> String {
    let short = x.to_f64().to_string();
    match exact::parse_decimal(&short) {
        Some(q) if x.is_rational() && *x.rational_part() == q => short,
        _ => x.to_string(),
    }
}

fn atom_list(atoms: &[Atom]) -> String {
    atoms.iter().map(|a| format!("{}@{}", exact_text(&a.value), exact_text(&a.prob))).collect::<Vec<_>>().join(",")
}

fn parse_atoms(s: &str) -> Result<Vec<Atom>, EnsembleError> {
    let bad = || EnsembleError::Parse(format!("atom list {s:?}, expected value@prob,..."));
    s.split(',')
        .map(|item| {
            let (v, p) = item.split_once('@').ok_or_else(bad)?;
            let v = exact::parse_exact(v).map_err(|_| bad())?;
            let p = exact::parse_exact(p).map_err(|_| bad())?;
            Ok(Atom::new(v, p))
        })
        .collect()
}

/// `key=value` segments separated by `:`; `base=` swallows the remainder so
/// that nested names keep their own colons.
struct Params<'a> {
    name: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Params<'a> {
    fn parse(mut rest: &'a str, name: &'a str) -> Result<Self, EnsembleError> {
        let mut pairs = Vec::new();
        if name.starts_with("atomic:") {
            return Ok(Self { name, pairs });
        }
        while !rest.is_empty() {
            if let Some(b) = rest.strip_prefix("base=") {
                pairs.push(("base", b));
                break;
            }
            let (seg, tail) = rest.split_once(':').unwrap_or((rest, ""));
            let (k, v) = seg
                .split_once('=')
                .ok_or_else(|| EnsembleError::Parse(format!("{name}: expected key=value, got {seg:?}")))?;
            pairs.push((k, v));
            rest = tail;
        }
        Ok(Self { name, pairs })
    }

    fn has(&self, key: &str) -> bool {
        self.pairs.iter().any(|(k, _)| *k == key)
    }

    fn get(&self, key: &str) -> Result<&'a str, EnsembleError> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| EnsembleError::Parse(format!("{}: missing parameter {key}", self.name)))
    }

    fn number(&self, key: &str) -> Result<f64, EnsembleError> {
        let v = self.get(key)?;
        v.parse().map_err(|_| EnsembleError::Parse(format!("{}: {key}={v} is not a number", self.name)))
    }

    fn only(&self, allowed: &[&str]) -> Result<(), EnsembleError> {
        match self.pairs.iter().find(|(k, _)| !allowed.contains(k)) {
            Some((k, _)) => Err(EnsembleError::Parse(format!("{}: unexpected parameter {k}", self.name))),
            None => Ok(()),
        }
    }

    fn none(&self) -> Result<(), EnsembleError> {
        self.only(&[])
    }
}

fn build_table(kind: &Kind) -> Result<MomentTable, EnsembleError> {
    let mut entries = Vec::new();
    if let Kind::Truncated { base, bound } = kind {
        let atomic_mass = moments::atomic_mass_inside(base, *bound);
        if atomic_mass == Some(0.0) {
            return Err(EnsembleError::Domain(format!("truncation at {bound} removes every atom")));
        }
        if atomic_mass.is_some() {
            for (m, l) in moment_indices() {
                let exact: Option<Surd> = moments::truncated_atomic(base, *bound, m, l);
                let value = match &exact {
                    Some(e) => e.to_f64(),
                    None => moments::truncated_atomic::<f64>(base, *bound, m, l).unwrap_or(f64::NAN),
                };
                entries.push(MomentEntry { m, l, value, exact, approximate: false });
            }
        } else {
            if !(moments::mass_inside(base, *bound)? > 0.0) {
                return Err(EnsembleError::Domain(format!("truncation at {bound} leaves no mass")));
            }
            for (m, l, value) in moments::truncated_numeric(base, *bound)? {
                entries.push(MomentEntry { m, l, value, exact: None, approximate: true });
            }
        }
        return Ok(MomentTable { entries });
    }
    for (m, l) in moment_indices() {
        let exact: Option<Surd> = moments::untruncated(kind, m, l);
        let value = match &exact {
            Some(e) => e.to_f64(),
            None => moments::untruncated::<f64>(kind, m, l).unwrap_or(f64::NAN),
        };
        entries.push(MomentEntry { m, l, value, exact, approximate: false });
    }
    Ok(MomentTable { entries })
}

/// `E[Re(ζ)^m Im(ζ)^l]` for `m + l ≤ 4`.
pub fn moments(spec: &DistributionSpec, m: u32, l: u32) -> Result<f64, EnsembleError> {
    spec.moment(m, l)
}

/// The two-atom real law with mean 0, variance 1 and third moment `m3`:
/// atoms `a, b = (m3 ∓ √(m3² + 4))/2` with probabilities `b/(b − a)` and
/// `−a/(b − a)`. Its support lies within `|m3| + 1`.
///
/// `m3` is taken as the exact rational value of the `f64`, so the resulting
/// moments are exact.
pub fn match_third_order(m3: f64) -> Result<DistributionSpec, EnsembleError> {
    let q = BigRational::from_float(m3).ok_or_else(|| EnsembleError::Domain(format!("m3 must be finite, got {m3}")))?;
    let four = BigRational::from_integer(4.into());
    let disc = Surd::sqrt_of(&(&q * &q + four)).expect("m3² + 4 > 0");
    let half = Surd::ratio(1, 2);
    let m3s = Surd::from_rational(q);
    let lo = m3s.checked_sub(&disc).and_then(|x| x.checked_mul(&half)).expect("same field");
    let hi = m3s.checked_add(&disc).and_then(|x| x.checked_mul(&half)).expect("same field");
    let p_lo = hi.checked_div(&disc).expect("nonzero width");
    let p_hi = lo.neg().checked_div(&disc).expect("nonzero width");
    let kind = Kind::AtomicReal { atoms: vec![Atom::new(lo, p_lo), Atom::new(hi, p_hi)] };
    DistributionSpec::from_kind(kind)
}

/// `{−√3, 0, √3}` with probabilities `1/6, 2/3, 1/6`: matches the real
/// standard Gaussian to order four.
pub fn match_fourth_order_gaussian() -> DistributionSpec {
    let r3 = Surd::sqrt_of(&BigRational::from_integer(3.into())).expect("3 > 0");
    let sixth = Surd::ratio(1, 6);
    let kind = Kind::AtomicReal {
        atoms: vec![
            Atom::new(r3.neg(), sixth.clone()),
            Atom::new(Surd::zero(), Surd::ratio(2, 3)),
            Atom::new(r3, sixth),
        ],
    };
    DistributionSpec::from_kind(kind).expect("gauss4 is standardized").with_label("gauss4")
}

/// `(1 − t)^{1/2} ζ' + t^{1/2} ζ''` with `ζ' ~ base` and `ζ''` a standard
/// Gaussian of the same symmetry class.
pub fn gaussian_divisible(t: f64, base: &DistributionSpec) -> Result<DistributionSpec, EnsembleError> {
    DistributionSpec::from_kind(Kind::GaussianDivisible { t, base: Box::new(base.clone()) })
}

/// `spec` conditioned on `|ζ| ≤ K` with `K = n^{10/C0}`.
pub fn truncate(spec: &DistributionSpec, c0: f64, n: usize) -> Result<DistributionSpec, EnsembleError> {
    if !(c0 > 0.0) || n == 0 {
        return Err(EnsembleError::Domain(format!("truncation needs C0 > 0 and n >= 1, got C0={c0}, n={n}")));
    }
    let bound = (n as f64).powf(10.0 / c0);
    DistributionSpec::from_kind(Kind::Truncated { base: Box::new(spec.clone()), bound })
}

/// Exact check that a rational-valued moment equals `target`.
pub fn exact_equals(x: &Surd, target: &BigRational) -> bool {
    x.is_rational() && x.rational_part() == target
}
