//! Exact rational helpers: parsing, dyadic rounding, and certified bounds for
//! roots, rational powers and base-2 logarithms.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.125`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::invalid(format!("not a rational number: {text:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::invalid(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, digits)) = s.split_once('.') {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole: BigInt = match whole.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let scale = BigInt::from(10u32).pow(digits.len() as u32);
        let frac: BigInt = digits.parse().map_err(|_| bad())?;
        let value = Rational::new(whole * &scale + frac, scale);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(int(n))
}

pub fn bit_length(n: &BigInt) -> u64 {
    n.bits()
}

pub fn pow2(exp: i64) -> Rational {
    if exp >= 0 {
        int(BigInt::one() << (exp as usize))
    } else {
        Rational::new(BigInt::one(), BigInt::one() << ((-exp) as usize))
    }
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

/// Distance to the nearest integer.
pub fn dist_to_int(x: &Rational) -> Rational {
    let f = frac(x);
    let g = Rational::one() - &f;
    if f <= g {
        f
    } else {
        g
    }
}

/// `floor(log2(x))` for `x > 0`.
pub fn floor_log2(x: &Rational) -> i64 {
    assert!(x.is_positive(), "floor_log2 of non-positive value");
    let e = x.numer().bits() as i64 - x.denom().bits() as i64;
    if *x >= pow2(e) {
        e
    } else {
        e - 1
    }
}

/// Largest power of two not exceeding `x > 0`.
pub fn dyadic_floor(x: &Rational) -> Rational {
    pow2(floor_log2(x))
}

fn round_to_bits(x: &Rational, bits: u32, up: bool) -> Rational {
    let scale = BigInt::one() << bits as usize;
    let scaled = x * Rational::from_integer(scale.clone());
    let n = if up { scaled.ceil() } else { scaled.floor() };
    Rational::new(n.to_integer(), scale)
}

/// Bounds `lo <= x^(1/n) <= hi` for `x >= 0`.
///
/// The absolute width is at most `2^-bits` once `x >= 1`; for small `x` the
/// grid is refined so that the relative precision is comparable.
pub fn root_bounds(x: &Rational, n: u32, bits: u32) -> (Rational, Rational) {
    assert!(!x.is_negative(), "root of negative value");
    assert!(n >= 1);
    if x.is_zero() || n == 1 {
        return (x.clone(), x.clone());
    }
    let extra = if *x < Rational::one() {
        ((-floor_log2(x)) as u64 / n as u64 + 2) as u32
    } else {
        0
    };
    let s = bits + extra;
    let scaled = x * Rational::from_integer(BigInt::one() << (n as usize * s as usize));
    let y_lo = scaled.floor().to_integer();
    let y_hi = scaled.ceil().to_integer();
    let r_lo = y_lo.nth_root(n);
    let mut r_hi = y_hi.nth_root(n);
    if r_hi.pow(n) < y_hi {
        r_hi += 1u32;
    }
    let den = BigInt::one() << s as usize;
    (Rational::new(r_lo, den.clone()), Rational::new(r_hi, den))
}

/// Bounds on `x^r` for `x >= 0` and rational `r > 0` with small numerator
/// and denominator.
pub fn pow_bounds(x: &Rational, r: &Rational, bits: u32) -> (Rational, Rational) {
    assert!(r.is_positive());
    let a = r.numer().to_u32().expect("exponent numerator too large");
    let b = r.denom().to_u32().expect("exponent denominator too large");
    let y = num_traits::pow(x.clone(), a as usize);
    root_bounds(&y, b, bits)
}

fn log2_mantissa(y: &Rational, bits: u32, up: bool) -> Rational {
    let prec = bits + 16;
    let two = int(2);
    let mut z = y.clone();
    let mut acc = Rational::zero();
    let mut weight = rat(1, 2);
    for _ in 0..bits {
        z = round_to_bits(&(&z * &z), prec, up);
        if z >= two {
            acc += &weight;
            z /= &two;
        }
        weight /= &two;
    }
    if up {
        acc + pow2(-(bits as i64))
    } else {
        acc
    }
}

/// Bounds `lo <= log2(x) <= hi` for `x > 0`, width at most `2^-bits`.
pub fn log2_bounds(x: &Rational, bits: u32) -> (Rational, Rational) {
    let e = floor_log2(x);
    let mantissa = x / pow2(e);
    let base = int(e);
    (
        &base + log2_mantissa(&mantissa, bits, false),
        &base + log2_mantissa(&mantissa, bits, true),
    )
}

pub fn min_rat(a: Rational, b: Rational) -> Rational {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_rat(a: Rational, b: Rational) -> Rational {
    if a >= b {
        a
    } else {
        b
    }
}

/// Closed rational interval, used for certified enclosures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-&self.hi, -&self.lo)
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = products[0].clone();
        let mut hi = products[0].clone();
        for p in &products[1..] {
            if *p < lo {
                lo = p.clone();
            }
            if *p > hi {
                hi = p.clone();
            }
        }
        Interval::new(lo, hi)
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        let a = &self.lo * k;
        let b = &self.hi * k;
        match a.cmp(&b) {
            Ordering::Greater => Interval::new(b, a),
            _ => Interval::new(a, b),
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    /// Largest absolute value over the interval.
    pub fn magnitude(&self) -> Rational {
        max_rat(self.lo.abs(), self.hi.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_rational("1/6").unwrap(), rat(1, 6));
        assert_eq!(parse_rational(" -3 ").unwrap(), int(-3));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn dyadic_floor_examples() {
        assert_eq!(dyadic_floor(&rat(1, 34)), rat(1, 64));
        assert_eq!(dyadic_floor(&rat(1, 32)), rat(1, 32));
        assert_eq!(dyadic_floor(&rat(3, 1)), int(2));
        assert_eq!(floor_log2(&rat(1, 4)), -2);
    }

    #[test]
    fn root_bounds_bracket_sqrt2() {
        let (lo, hi) = root_bounds(&int(2), 2, 40);
        assert!(&lo * &lo <= int(2) && &hi * &hi >= int(2));
        assert!(&hi - &lo <= pow2(-40));
        let tiny = rat(1, 1 << 40);
        let (lo, hi) = root_bounds(&tiny, 4, 20);
        assert!(num_traits::pow(lo.clone(), 4) <= tiny && num_traits::pow(hi.clone(), 4) >= tiny);
        assert!(lo.is_positive());
    }

    #[test]
    fn log2_bounds_are_tight() {
        for x in [int(80), rat(3, 7), int(1), int(1 << 20)] {
            let (lo, hi) = log2_bounds(&x, 30);
            assert!(lo <= hi && &hi - &lo <= pow2(-30));
            // 2^lo <= x <= 2^hi checked through the integer part only
            let f = x.to_f64().unwrap().log2();
            assert!(lo.to_f64().unwrap() <= f + 1e-12 && f - 1e-12 <= hi.to_f64().unwrap());
        }
        let (lo, hi) = log2_bounds(&int(8), 20);
        assert!(lo <= int(3) && int(3) <= hi);
    }

    #[test]
    fn interval_mul_handles_signs() {
        let a = Interval::new(int(-2), int(3));
        let b = Interval::new(int(-1), int(4));
        assert_eq!(a.mul(&b), Interval::new(int(-8), int(12)));
    }
}
