//! Exact arithmetic in multiquadratic fields `Q(sqrt d1, ..., sqrt dk)`.
//!
//! An element is stored as `c + sum q_d * sqrt(d)` over distinct squarefree
//! `d > 1`. Square roots of distinct squarefree integers are linearly
//! independent over the rationals, so this representation is canonical and
//! equality is decided exactly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{Interval, Rational};

/// Radicands above this bound are rejected: canonical form needs a full
/// squarefree factorization by trial division.
const MAX_TRIAL_ROOT: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quadratic {
    constant: Rational,
    terms: BTreeMap<BigInt, Rational>,
}

/// Dyadic approximation `num / 2^shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub num: BigInt,
    pub shift: u32,
}

impl Dyadic {
    pub fn to_rational(&self) -> Rational {
        Rational::new(self.num.clone(), BigInt::one() << self.shift as usize)
    }
}

/// Writes `n = s^2 * d` with `d` squarefree.
pub fn squarefree_split(n: &BigInt) -> Result<(BigInt, BigInt)> {
    if !n.is_positive() {
        return Err(Error::invalid(format!("radicand must be positive, got {n}")));
    }
    let limit = BigInt::from(MAX_TRIAL_ROOT);
    let mut rest = n.clone();
    let mut square = BigInt::one();
    let mut kernel = BigInt::one();
    let mut p = BigInt::from(2u32);
    while &p * &p <= rest {
        if p > limit {
            return Err(Error::invalid(format!(
                "radicand {n} too large to reduce to squarefree form"
            )));
        }
        let mut exponent = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            exponent += 1;
        }
        square *= p.pow(exponent / 2);
        if exponent % 2 == 1 {
            kernel *= &p;
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    // what is left is 1 or a prime
    kernel *= rest;
    Ok((square, kernel))
}

impl Quadratic {
    pub fn zero() -> Self {
        Quadratic::rational(Rational::zero())
    }

    pub fn rational(c: Rational) -> Self {
        Quadratic {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    /// `sqrt(radicand)` in canonical form; errors on perfect squares.
    pub fn sqrt_of(radicand: &BigInt) -> Result<Self> {
        let (s, d) = squarefree_split(radicand)?;
        if d.is_one() {
            return Err(Error::invalid(format!("radicand {radicand} is a perfect square")));
        }
        let mut terms = BTreeMap::new();
        terms.insert(d, Rational::from_integer(s));
        Ok(Quadratic {
            constant: Rational::zero(),
            terms,
        })
    }

    /// `c + q * sqrt(radicand)`, allowing perfect-square radicands.
    fn affine_sqrt(c: Rational, q: Rational, radicand: &BigInt) -> Result<Self> {
        let (s, d) = squarefree_split(radicand)?;
        let coef = q * Rational::from_integer(s);
        if d.is_one() {
            return Ok(Quadratic::rational(c + coef));
        }
        let mut out = Quadratic::rational(c);
        if !coef.is_zero() {
            out.terms.insert(d, coef);
        }
        Ok(out)
    }

    /// Value of a continued fraction `[head; (period)]` (period may be empty).
    pub fn from_cfrac(head: &[BigInt], period: &[BigInt]) -> Result<Self> {
        if head.is_empty() && period.is_empty() {
            return Err(Error::invalid("empty continued fraction"));
        }
        if head.iter().skip(1).any(|a| !a.is_positive()) {
            return Err(Error::invalid(
                "continued fraction partial quotients after the first must be positive",
            ));
        }
        if period.iter().any(|a| !a.is_positive()) {
            return Err(Error::invalid("periodic partial quotients must be positive"));
        }
        let [a, b, c, d] = mobius(head);
        if period.is_empty() {
            // finite expansion: value is A/C
            return Ok(Quadratic::rational(Rational::new(a, c)));
        }
        // y = [period; y] solves Q y^2 + (Q' - P) y - P' = 0
        let [p, p1, q, q1] = mobius(period);
        let disc = (&q1 - &p).pow(2) + BigInt::from(4u32) * &q * &p1;
        let u = &p - &q1;
        let w = BigInt::from(2u32) * &q;
        // x = (a y + b) / (c y + d) with y = (u + sqrt(disc)) / w
        let alpha = &a * &u + &b * &w;
        let gamma = &c * &u + &d * &w;
        let den = &gamma * &gamma - &c * &c * &disc;
        if den.is_zero() {
            return Err(Error::invalid("degenerate continued fraction"));
        }
        let constant = Rational::new(&alpha * &gamma - &a * &c * &disc, den.clone());
        let coef = Rational::new(&a * &gamma - &alpha * &c, den);
        Quadratic::affine_sqrt(constant, coef, &disc)
    }

    /// `p + q * sqrt(radicand)` with a non-square radicand.
    pub fn surd(p: Rational, q: Rational, radicand: &BigInt) -> Result<Self> {
        let root = Quadratic::sqrt_of(radicand)?;
        Ok(root.mul_rat(&q).add(&Quadratic::rational(p)))
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn terms(&self) -> &BTreeMap<BigInt, Rational> {
        &self.terms
    }

    pub fn is_rational(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Quadratic) -> Quadratic {
        let mut terms = self.terms.clone();
        for (d, q) in &other.terms {
            let entry = terms.entry(d.clone()).or_insert_with(Rational::zero);
            *entry += q;
            if entry.is_zero() {
                terms.remove(d);
            }
        }
        Quadratic {
            constant: &self.constant + &other.constant,
            terms,
        }
    }

    pub fn neg(&self) -> Quadratic {
        self.mul_rat(&-Rational::one())
    }

    pub fn sub(&self, other: &Quadratic) -> Quadratic {
        self.add(&other.neg())
    }

    pub fn mul_rat(&self, k: &Rational) -> Quadratic {
        if k.is_zero() {
            return Quadratic::zero();
        }
        Quadratic {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(d, q)| (d.clone(), q * k)).collect(),
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Quadratic {
        self.mul_rat(&Rational::from_integer(k.clone()))
    }

    /// Adds an integer to the constant term.
    pub fn shift(&self, k: &BigInt) -> Quadratic {
        Quadratic {
            constant: &self.constant + Rational::from_integer(k.clone()),
            terms: self.terms.clone(),
        }
    }

    /// Dyadic `a` with `|self - a| <= 2^-k`.
    pub fn approximant(&self, k: u32) -> Dyadic {
        let count = self.terms.len() as u64;
        let guard = 64 - (2 * count + 1).leading_zeros() + 1;
        let shift = k + guard;
        let unit = BigInt::one() << shift as usize;
        let mut num = (self.constant.numer() * &unit).div_floor(self.constant.denom());
        for (d, q) in &self.terms {
            let extra = q.numer().bits() as u32 + 1;
            let wide = shift + extra;
            let s = (d << (2 * wide as usize)).sqrt();
            let divisor = q.denom() << extra as usize;
            num += (q.numer() * s).div_floor(&divisor);
        }
        Dyadic { num, shift }
    }

    /// Interval of width `2^(1-k)` containing the value.
    pub fn enclosure(&self, k: u32) -> Interval {
        if self.is_rational() {
            return Interval::point(self.constant.clone());
        }
        let a = self.approximant(k).to_rational();
        let r = Rational::new(BigInt::one(), BigInt::one() << k as usize);
        Interval::new(&a - &r, a + r)
    }

    /// Sign of the value, decided by refinement. Zero only for the zero element.
    pub fn signum(&self, cap: u32) -> Result<i8> {
        if self.is_rational() {
            return Ok(if self.constant.is_positive() {
                1
            } else if self.constant.is_negative() {
                -1
            } else {
                0
            });
        }
        let mut k = 32;
        loop {
            let e = self.enclosure(k);
            if e.lo.is_positive() {
                return Ok(1);
            }
            if e.hi.is_negative() {
                return Ok(-1);
            }
            if k >= cap {
                return Err(Error::PrecisionCap {
                    context: "deciding the sign of a quadratic irrational".into(),
                    cap,
                });
            }
            k = (k * 2).min(cap);
        }
    }

    /// `floor` of the value. Irrational values are never integers, so the
    /// refinement terminates; the cap only guards pathological sizes.
    pub fn floor(&self, cap: u32) -> Result<BigInt> {
        if self.is_rational() {
            return Ok(self.constant.floor().to_integer());
        }
        let mut k = 32;
        loop {
            let e = self.enclosure(k);
            let f_lo = e.lo.floor();
            if f_lo == e.hi.floor() {
                return Ok(f_lo.to_integer());
            }
            if k >= cap {
                return Err(Error::PrecisionCap {
                    context: "reducing a point modulo 1".into(),
                    cap,
                });
            }
            k = (k * 2).min(cap);
        }
    }
}

/// Coefficients `[A, B, C, D]` with `[terms..., y] = (A y + B) / (C y + D)`.
fn mobius(terms: &[BigInt]) -> [BigInt; 4] {
    let mut m = [BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()];
    for a in terms {
        let [p, p1, q, q1] = m;
        m = [&p * a + &p1, p, &q * a + &q1, q];
    }
    m
}

/// Partial quotients of a rational number.
pub fn rational_cfrac(x: &Rational) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    while !den.is_zero() {
        let (q, r) = num.div_mod_floor(&den);
        out.push(q);
        num = den;
        den = r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn squarefree_reduction() {
        assert_eq!(squarefree_split(&big(8)).unwrap(), (big(2), big(2)));
        assert_eq!(squarefree_split(&big(72)).unwrap(), (big(6), big(2)));
        assert_eq!(squarefree_split(&big(30)).unwrap(), (big(1), big(30)));
        assert_eq!(squarefree_split(&big(49)).unwrap(), (big(7), big(1)));
        assert!(Quadratic::sqrt_of(&big(16)).is_err());
        assert!(Quadratic::sqrt_of(&big(0)).is_err());
    }

    #[test]
    fn sqrt8_equals_twice_sqrt2() {
        let a = Quadratic::sqrt_of(&big(8)).unwrap();
        let b = Quadratic::sqrt_of(&big(2)).unwrap().mul_int(&big(2));
        assert_eq!(a, b);
    }

    #[test]
    fn cfrac_conversions() {
        let sqrt2 = Quadratic::from_cfrac(&[big(1)], &[big(2)]).unwrap();
        assert_eq!(sqrt2, Quadratic::sqrt_of(&big(2)).unwrap());
        let sqrt3 = Quadratic::from_cfrac(&[big(1)], &[big(1), big(2)]).unwrap();
        assert_eq!(sqrt3, Quadratic::sqrt_of(&big(3)).unwrap());
        let golden = Quadratic::from_cfrac(&[], &[big(1)]).unwrap();
        let expected = Quadratic::surd(rat(1, 2), rat(1, 2), &big(5)).unwrap();
        assert_eq!(golden, expected);
        let finite = Quadratic::from_cfrac(&[big(0), big(2), big(3)], &[]).unwrap();
        assert_eq!(finite, Quadratic::rational(rat(3, 7)));
        assert!(Quadratic::from_cfrac(&[], &[]).is_err());
        assert!(Quadratic::from_cfrac(&[big(1)], &[big(0)]).is_err());
    }

    #[test]
    fn approximant_error_bound() {
        let x = Quadratic::sqrt_of(&big(2))
            .unwrap()
            .mul_rat(&rat(-7, 3))
            .add(&Quadratic::sqrt_of(&big(3)).unwrap())
            .add(&Quadratic::rational(rat(5, 11)));
        let reference = -7.0 / 3.0 * 2f64.sqrt() + 3f64.sqrt() + 5.0 / 11.0;
        for k in [4u32, 10, 20, 40] {
            let a = x.approximant(k).to_rational();
            let err = (num_traits::ToPrimitive::to_f64(&a).unwrap() - reference).abs();
            assert!(err <= 2f64.powi(-(k as i32)) + 1e-15, "k={k} err={err}");
        }
    }

    #[test]
    fn floor_and_sign() {
        let x = Quadratic::sqrt_of(&big(2)).unwrap().mul_int(&big(-3));
        assert_eq!(x.floor(4096).unwrap(), big(-5));
        assert_eq!(x.signum(4096).unwrap(), -1);
        assert_eq!(Quadratic::rational(int(0)).signum(64).unwrap(), 0);
    }

    #[test]
    fn rational_cfrac_terms() {
        assert_eq!(rational_cfrac(&rat(3, 7)), vec![big(0), big(2), big(3)]);
        assert_eq!(rational_cfrac(&rat(-1, 2)), vec![big(-1), big(2)]);
    }
}
