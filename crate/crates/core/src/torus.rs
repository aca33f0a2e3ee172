//! Points of the circle group `R/Z`, certified enclosures of the distance to
//! the nearest integer, and the two norm-contraction estimates.

use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadratic::{rational_cfrac, Quadratic};
use crate::rational::{dist_to_int, frac, int, max_rat, min_rat, parse_rational, pow2, rat, Interval, Rational};

/// Precision schedule for certified comparisons: start at `start` bits and
/// double up to `cap`; a comparison still undecided at `cap` is an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub start: u32,
    pub cap: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { start: 32, cap: 4096 }
    }
}

impl Precision {
    /// Levels `k0, 2 k0, 4 k0, ...` ending exactly at the cap, where `k0` is
    /// at least `floor` bits.
    pub fn levels(&self, floor: u32) -> Vec<u32> {
        let mut k = self.start.max(floor).min(self.cap).max(1);
        let mut out = vec![k];
        while k < self.cap {
            k = (k * 2).min(self.cap);
            out.push(k);
        }
        out
    }

    fn cap_error(&self, context: impl Into<String>) -> Error {
        Error::PrecisionCap {
            context: context.into(),
            cap: self.cap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    Rational,
    QuadraticSurd,
    Cfrac,
}

/// A point of `T = R/Z`, stored as its representative in `[0, 1)`.
///
/// Every supported kind is an element of a multiquadratic field, so equality
/// and hashing are exact. `kind` records how the point was described and does
/// not take part in equality.
#[derive(Clone, Debug)]
pub struct TorusPoint {
    value: Quadratic,
    kind: PointKind,
}

impl PartialEq for TorusPoint {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Eq for TorusPoint {}

impl Hash for TorusPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.value.hash(state);
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value.constant())?;
        for (d, q) in self.value.terms() {
            write!(f, " + ({q})*sqrt({d})")?;
        }
        Ok(())
    }
}

/// Reduces modulo 1. Irrational values are never integers, so refining the
/// enclosure always separates the floor eventually.
fn reduce(value: Quadratic) -> Quadratic {
    if value.is_rational() {
        let f = value.constant().floor().to_integer();
        return value.shift(&-f);
    }
    let mut k = 32;
    loop {
        let e = value.enclosure(k);
        let f = e.lo.floor();
        if f == e.hi.floor() {
            return value.shift(&-f.to_integer());
        }
        k *= 2;
    }
}

impl TorusPoint {
    pub fn zero() -> Self {
        TorusPoint::rational(Rational::zero())
    }

    pub fn rational(x: Rational) -> Self {
        TorusPoint {
            value: Quadratic::rational(frac(&x)),
            kind: PointKind::Rational,
        }
    }

    pub fn from_quadratic(value: Quadratic) -> Self {
        let kind = if value.is_rational() {
            PointKind::Rational
        } else {
            PointKind::QuadraticSurd
        };
        TorusPoint {
            value: reduce(value),
            kind,
        }
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn value(&self) -> &Quadratic {
        &self.value
    }

    pub fn is_rational(&self) -> bool {
        self.value.is_rational()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_rational() && self.value.constant().is_zero()
    }

    /// The exact value when the point is rational.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.value.is_rational().then(|| self.value.constant())
    }

    pub fn add(&self, other: &TorusPoint) -> TorusPoint {
        TorusPoint::from_quadratic(self.value.add(&other.value))
    }

    pub fn neg(&self) -> TorusPoint {
        TorusPoint::from_quadratic(self.value.neg())
    }

    pub fn sub(&self, other: &TorusPoint) -> TorusPoint {
        TorusPoint::from_quadratic(self.value.sub(&other.value))
    }

    pub fn mul_int(&self, k: &BigInt) -> TorusPoint {
        TorusPoint::from_quadratic(self.value.mul_int(k))
    }

    /// `a_k` with `|x - a_k| <= 2^-k` (exact for rational points).
    pub fn approximant(&self, k: u32) -> Rational {
        if self.is_rational() {
            return self.value.constant().clone();
        }
        self.value.approximant(k).to_rational()
    }

    /// Enclosure of the representative in `[0, 1)`, width `2^(1-k)`.
    pub fn enclosure(&self, k: u32) -> Interval {
        self.value.enclosure(k)
    }

    /// Continued-fraction convergents `p/q` of the representative, in order,
    /// up to and including the first with `q > max_den` (or the exact value
    /// for rational points).
    pub fn convergents(&self, max_den: &BigInt, prec: &Precision) -> Result<Vec<(BigInt, BigInt)>> {
        if let Some(x) = self.as_rational() {
            return Ok(convergents_of_terms(&rational_cfrac(x), max_den));
        }
        let floor = 2 * max_den.bits() as u32 + 24;
        for k in prec.levels(floor) {
            let e = self.enclosure(k);
            let lo = rational_cfrac(&e.lo);
            let hi = rational_cfrac(&e.hi);
            let common = lo.iter().zip(&hi).take_while(|(a, b)| a == b).count();
            // the last agreeing quotient may still differ for the true value
            let trusted = &lo[..common.saturating_sub(1)];
            let convs = convergents_of_terms(trusted, max_den);
            if convs.last().is_some_and(|(_, q)| q > max_den) {
                return Ok(convs);
            }
        }
        Err(prec.cap_error("expanding a continued fraction"))
    }
}

fn convergents_of_terms(terms: &[BigInt], max_den: &BigInt) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
    for a in terms {
        let p = a * &p0 + &p1;
        let q = a * &q0 + &q1;
        p1 = std::mem::replace(&mut p0, p.clone());
        q1 = std::mem::replace(&mut q0, q.clone());
        let done = q > *max_den;
        out.push((p, q));
        if done {
            break;
        }
    }
    out
}

/// JSON point descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PointDescriptor {
    Rational {
        num: i64,
        den: i64,
    },
    /// `p + q * sqrt(radicand)`; `p` defaults to 0 and `q` to 1.
    Sqrt {
        radicand: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<RationalField>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<RationalField>,
    },
    Cfrac {
        head: Vec<i64>,
        #[serde(default)]
        period: Vec<i64>,
    },
}

/// A rational given either as a JSON integer or as a string like `"1/2"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalField {
    Int(i64),
    Text(String),
}

impl RationalField {
    pub fn value(&self) -> Result<Rational> {
        match self {
            RationalField::Int(n) => Ok(int(*n)),
            RationalField::Text(s) => parse_rational(s),
        }
    }
}

/// Builds the canonical point for a descriptor.
pub fn make_point(desc: &PointDescriptor) -> Result<TorusPoint> {
    match desc {
        PointDescriptor::Rational { num, den } => {
            if *den == 0 {
                return Err(Error::invalid("zero denominator"));
            }
            Ok(TorusPoint::rational(rat(*num, *den)))
        }
        PointDescriptor::Sqrt { radicand, p, q } => {
            let p = p.as_ref().map(RationalField::value).transpose()?.unwrap_or_default();
            let q = match q {
                Some(q) => q.value()?,
                None => Rational::one(),
            };
            if q.is_zero() {
                return Err(Error::invalid("sqrt point with zero coefficient"));
            }
            let value = Quadratic::surd(p, q, &BigInt::from(*radicand))?;
            Ok(TorusPoint {
                value: reduce(value),
                kind: PointKind::QuadraticSurd,
            })
        }
        PointDescriptor::Cfrac { head, period } => {
            let head: Vec<BigInt> = head.iter().map(|&a| a.into()).collect();
            let period: Vec<BigInt> = period.iter().map(|&a| a.into()).collect();
            let value = Quadratic::from_cfrac(&head, &period)?;
            let rational = value.is_rational();
            Ok(TorusPoint {
                value: reduce(value),
                kind: if rational {
                    PointKind::Rational
                } else {
                    PointKind::Cfrac
                },
            })
        }
    }
}

/// Certified enclosure `[lo, hi]` of a value of `||.||`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormInterval {
    pub lo: Rational,
    pub hi: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    AtMost,
    Greater,
    Undecided,
}

impl NormInterval {
    pub fn exact(v: Rational) -> Self {
        NormInterval { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Compares against `c >= 0`.
    pub fn cmp_threshold(&self, c: &Rational) -> Threshold {
        if self.hi <= *c {
            Threshold::AtMost
        } else if self.lo > *c {
            Threshold::Greater
        } else {
            Threshold::Undecided
        }
    }

    /// Intersection with `[0, bound]`; `None` if empty.
    fn clamp_above(&self, bound: &Rational) -> Option<NormInterval> {
        (self.lo <= *bound).then(|| NormInterval {
            lo: self.lo.clone(),
            hi: min_rat(self.hi.clone(), bound.clone()),
        })
    }
}

pub fn cmp_threshold(v: &NormInterval, c: &Rational) -> Threshold {
    v.cmp_threshold(c)
}

/// `||x||` over all `x` in `[lo, hi]`.
pub fn norm_of_interval(lo: &Rational, hi: &Rational) -> NormInterval {
    let half = rat(1, 2);
    if hi - lo >= Rational::one() {
        return NormInterval {
            lo: Rational::zero(),
            hi: half,
        };
    }
    let f = lo.floor();
    let a = lo - &f;
    let b = hi - &f;
    let na = dist_to_int(&a);
    let nb = dist_to_int(&b);
    let one = Rational::one();
    let has_int = a.is_zero() || b >= one;
    let has_half = (a <= half && half <= b) || b >= rat(3, 2);
    NormInterval {
        lo: if has_int {
            Rational::zero()
        } else {
            min_rat(na.clone(), nb.clone())
        },
        hi: if has_half { half } else { max_rat(na, nb) },
    }
}

/// Enclosure of `||n beta||` at precision level `k`; exact for rational
/// `beta`, width at most `n * 2^(1-k)` otherwise.
pub fn scaled_norm(n: &BigInt, beta: &TorusPoint, k: u32) -> NormInterval {
    if let Some(x) = beta.as_rational() {
        return NormInterval::exact(rational_scaled_norm(n, x));
    }
    let a = beta.approximant(k);
    let n_rat = Rational::from_integer(n.clone());
    let r = &n_rat.abs() * pow2(-(k as i64));
    let center = &n_rat * a;
    norm_of_interval(&(&center - &r), &(center + r))
}

/// `||n p/q||` as the exact value `min(np mod q, q - np mod q) / q`.
pub fn rational_scaled_norm(n: &BigInt, x: &Rational) -> Rational {
    let q = x.denom();
    let r = (n * x.numer()).mod_floor(q);
    let s = q - &r;
    Rational::new(if r <= s { r } else { s }, q.clone())
}

/// Decides `||n beta|| <= c` by refining precision.
pub fn norm_at_most(n: &BigInt, beta: &TorusPoint, c: &Rational, prec: &Precision) -> Result<bool> {
    if let Some(x) = beta.as_rational() {
        return Ok(rational_scaled_norm(n, x) <= *c);
    }
    for k in prec.levels(n.bits() as u32 + 16) {
        match scaled_norm(n, beta, k).cmp_threshold(c) {
            Threshold::AtMost => return Ok(true),
            Threshold::Greater => return Ok(false),
            Threshold::Undecided => {}
        }
    }
    Err(prec.cap_error(format!("comparing ||{n} beta|| with {c}")))
}

/// Enclosure of `||n beta||` of absolute width at most `2^-bits`.
pub fn norm_enclosure(n: &BigInt, beta: &TorusPoint, bits: u32) -> NormInterval {
    scaled_norm(n, beta, bits + n.bits() as u32 + 1)
}

/// Norm contraction, linear form: if `||k alpha|| <= d` for `k = 1..=n` and
/// `d < 1/3`, then `||alpha|| <= d/n`. Returns `None` when the hypothesis
/// fails, otherwise the enclosure of `||alpha||` cut down to `[0, d/n]`.
pub fn linear_contraction_bound(
    alpha: &TorusPoint,
    n: u64,
    d: &Rational,
    prec: &Precision,
) -> Result<Option<NormInterval>> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if d.is_negative() || *d >= rat(1, 3) {
        return Err(Error::invalid(format!("need 0 <= d < 1/3, got {d}")));
    }
    for k in 1..=n {
        if !norm_at_most(&BigInt::from(k), alpha, d, prec)? {
            return Ok(None);
        }
    }
    let bound = d / int(n);
    certified_cut(alpha, &BigInt::one(), &bound, prec).map(Some)
}

/// Norm contraction, geometric form: if `||beta + 2^l alpha|| <= d` for
/// `l = 0..=n` and `d < 1/6`, then `||alpha|| <= d / 2^(n-2)`.
pub fn geometric_contraction_bound(
    alpha: &TorusPoint,
    beta: &TorusPoint,
    n: u64,
    d: &Rational,
    prec: &Precision,
) -> Result<Option<NormInterval>> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if d.is_negative() || *d >= rat(1, 6) {
        return Err(Error::invalid(format!("need 0 <= d < 1/6, got {d}")));
    }
    let one = BigInt::one();
    let mut step = alpha.clone();
    for l in 0..=n {
        if l > 0 {
            step = step.add(&step);
        }
        if !norm_at_most(&one, &beta.add(&step), d, prec)? {
            return Ok(None);
        }
    }
    let bound = d * pow2(2 - n as i64);
    certified_cut(alpha, &one, &bound, prec).map(Some)
}

/// Enclosure of `||n alpha||` intersected with `[0, bound]`, for a caller that
/// has already established `||n alpha|| <= bound`.
fn certified_cut(alpha: &TorusPoint, n: &BigInt, bound: &Rational, prec: &Precision) -> Result<NormInterval> {
    for k in prec.levels(64) {
        if let Some(v) = scaled_norm(n, alpha, k).clamp_above(bound) {
            return Ok(v);
        }
    }
    Err(prec.cap_error("cutting a norm enclosure"))
}

/// Circular distance `||a - b||` as an enclosure.
pub fn distance_enclosure(a: &TorusPoint, b: &TorusPoint, k: u32) -> NormInterval {
    scaled_norm(&BigInt::one(), &a.sub(b), k)
}

/// Lossy conversion used only for human-readable output.
pub fn approx_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
