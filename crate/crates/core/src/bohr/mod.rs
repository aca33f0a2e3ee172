//! Finite Bohr sets `{n <= N : ||n alpha_j|| <= eps for all j}`, their
//! generalized-arithmetic-progression covers, and exact arc sets of norm
//! constraints.

pub mod arcs;
pub mod gap;

pub use arcs::{arcs_for_constraint, constraint_pieces, solve_small_norm_set, Arc, ArcSet, Membership};
pub use gap::{achieved_constants, decompose_gap, verify_cover_containment, GapCover, Generator};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::rational::{int, rat, Interval, Rational};
use crate::torus::{norm_at_most, Threshold, TorusPoint};

/// Ranges shorter than this are scanned directly even when a lattice walk
/// is available.
const SCAN_CUTOFF: u64 = 4096;

/// `H_{N,eps}(alpha_1, ..., alpha_t)` with its sorted member list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BohrSet {
    alphas: Vec<TorusPoint>,
    eps: Rational,
    limit: u64,
    members: Vec<u64>,
}

impl BohrSet {
    pub fn alphas(&self) -> &[TorusPoint] {
        &self.alphas
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Wraps an explicit member list; the list must be strictly increasing
    /// and bounded by `limit`. Membership itself is not re-checked.
    pub fn from_members(alphas: Vec<TorusPoint>, eps: Rational, limit: u64, members: Vec<u64>) -> Result<Self> {
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("Bohr set members must be strictly increasing"));
        }
        if members.first().is_some_and(|&m| m == 0) || members.last().is_some_and(|&m| m > limit) {
            return Err(Error::invalid("Bohr set members must lie in [1, N]"));
        }
        Ok(BohrSet {
            alphas,
            eps,
            limit,
            members,
        })
    }
}

/// Enumerates `H_{N,eps}(alphas)` with every membership certified.
pub fn enumerate_bohr(alphas: &[TorusPoint], eps: &Rational, limit: u64, cfg: &Config) -> Result<BohrSet> {
    if limit == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let members = bohr_members_in(alphas, eps, 1, limit, cfg)?;
    Ok(BohrSet {
        alphas: alphas.to_vec(),
        eps: eps.clone(),
        limit,
        members,
    })
}

/// Members of the Bohr set lying in `[lo, hi]`.
pub fn bohr_members_in(alphas: &[TorusPoint], eps: &Rational, lo: u64, hi: u64, cfg: &Config) -> Result<Vec<u64>> {
    if alphas.is_empty() {
        return Err(Error::invalid("at least one generator is required"));
    }
    if !eps.is_positive() {
        return Err(Error::invalid("eps must be positive"));
    }
    let lo = lo.max(1);
    if lo > hi {
        return Ok(Vec::new());
    }
    let mut distinct: Vec<TorusPoint> = Vec::new();
    for a in alphas {
        if !distinct.contains(a) {
            distinct.push(a.clone());
        }
    }
    let (rational, irrational): (Vec<_>, Vec<_>) = distinct.into_iter().partition(|a| a.is_rational());
    let tests: Option<Vec<RationalTest>> = rational
        .iter()
        .map(|a| RationalTest::new(a.as_rational().expect("rational point"), eps))
        .collect();

    match (tests, irrational.as_slice()) {
        (Some(tests), []) => rational_members(&tests, lo, hi, cfg),
        (Some(tests), [x]) if *eps < rat(1, 4) && hi - lo >= SCAN_CUTOFF && tests.iter().all(|t| t.threshold == 0) => {
            // every rational constraint is divisibility by its denominator
            let mut step: u128 = 1;
            for t in &tests {
                step = step.lcm(&t.q);
                if step > u64::MAX as u128 {
                    return Ok(Vec::new());
                }
            }
            let step = step as u64;
            let scaled = x.mul_int(&BigInt::from(step));
            let sub_lo = lo.div_ceil(step);
            let sub_hi = hi / step;
            let found = lattice_members(&scaled, eps, sub_lo, sub_hi, cfg)?;
            Ok(found.into_iter().map(|m| m * step).collect())
        }
        _ => scan_members(alphas, eps, lo, hi, cfg),
    }
}

/// `||n p/q|| <= eps` is equivalent to `min(np mod q, q - np mod q) <= floor(eps q)`.
#[derive(Clone, Debug)]
struct RationalTest {
    p: u128,
    q: u128,
    threshold: u128,
}

impl RationalTest {
    fn new(x: &Rational, eps: &Rational) -> Option<Self> {
        let p = x.numer().to_u64()? as u128;
        let q = x.denom().to_u64()? as u128;
        let t = (eps * Rational::from_integer(x.denom().clone())).floor().to_integer();
        let threshold = t.to_u128().unwrap_or(u128::MAX).min(q);
        Some(RationalTest { p, q, threshold })
    }

    fn accepts(&self, n: u64) -> bool {
        let r = (n as u128 % self.q) * self.p % self.q;
        r.min(self.q - r) <= self.threshold
    }
}

fn rational_members(tests: &[RationalTest], lo: u64, hi: u64, cfg: &Config) -> Result<Vec<u64>> {
    let accepts = |n: u64| tests.iter().all(|t| t.accepts(n));
    let mut period: u128 = 1;
    for t in tests {
        period = period.lcm(&t.q);
        if period > u64::MAX as u128 {
            break;
        }
    }
    let span = hi - lo + 1;
    let mut out = Vec::new();
    if period <= cfg.scan_budget as u128 && (span as u128) > 2 * period {
        let period = period as u64;
        let residues: Vec<u64> = (0..period).filter(|&r| accepts(r)).collect();
        let expected = residues.len() as u128 * (span as u128 / period as u128 + 1);
        if expected > cfg.scan_budget as u128 {
            return Err(Error::budget("Bohr set member count", cfg.scan_budget));
        }
        let mut base = lo - lo % period;
        loop {
            for &r in &residues {
                let n = match base.checked_add(r) {
                    Some(n) => n,
                    None => return Ok(out),
                };
                if n > hi {
                    return Ok(out);
                }
                if n >= lo {
                    out.push(n);
                }
            }
            base = match base.checked_add(period) {
                Some(b) => b,
                None => return Ok(out),
            };
        }
    }
    if span > cfg.scan_budget {
        return Err(Error::budget("Bohr scan range", cfg.scan_budget));
    }
    out.extend((lo..=hi).filter(|&n| accepts(n)));
    Ok(out)
}

/// Fixed-point test for one irrational generator: with `a = floor(alpha 2^k)`
/// the distance `d` of `n a` to the nearest multiple of `2^k` is within `2n`
/// units of `||n alpha|| 2^k`.
struct FixedTest {
    a: u128,
    mask: u128,
    modulus: u128,
    /// `floor(eps 2^k)`
    threshold: u128,
}

impl FixedTest {
    fn new(alpha: &TorusPoint, eps: &Rational, hi: u64) -> Option<Self> {
        let n_bits = 64 - hi.leading_zeros();
        let k = (127 - n_bits).min(n_bits + 48);
        if k < n_bits + 16 {
            return None;
        }
        let scale = Rational::from_integer(BigInt::one() << k as usize);
        let a = (alpha.approximant(k + 2) * &scale).floor().to_integer().to_u128()?;
        let threshold = (eps * &scale).floor().to_integer().to_u128().unwrap_or(u128::MAX);
        let modulus = 1u128 << k;
        Some(FixedTest {
            a: a & (modulus - 1),
            mask: modulus - 1,
            modulus,
            threshold,
        })
    }

    fn classify(&self, n: u64) -> Threshold {
        let r = (n as u128).wrapping_mul(self.a) & self.mask;
        let d = r.min(self.modulus - r);
        let slack = 2 * n as u128 + 1;
        if d.saturating_add(slack) <= self.threshold {
            Threshold::AtMost
        } else if d > self.threshold.saturating_add(slack) {
            Threshold::Greater
        } else {
            Threshold::Undecided
        }
    }
}

enum Test {
    Rational(RationalTest),
    Fixed(FixedTest),
    Exact,
}

/// One integer at a time; irrational generators go through a fixed-point
/// filter and are refined individually only when it is inconclusive.
fn scan_members(alphas: &[TorusPoint], eps: &Rational, lo: u64, hi: u64, cfg: &Config) -> Result<Vec<u64>> {
    if hi - lo + 1 > cfg.scan_budget {
        return Err(Error::budget("Bohr scan range", cfg.scan_budget));
    }
    let tests: Vec<Test> = alphas
        .iter()
        .map(|a| match a.as_rational() {
            Some(x) => RationalTest::new(x, eps).map_or(Test::Exact, Test::Rational),
            None => FixedTest::new(a, eps, hi).map_or(Test::Exact, Test::Fixed),
        })
        .collect();
    let mut out = Vec::new();
    'next: for n in lo..=hi {
        for (alpha, test) in alphas.iter().zip(&tests) {
            let inside = match test {
                Test::Rational(t) => t.accepts(n),
                Test::Fixed(t) => match t.classify(n) {
                    Threshold::AtMost => true,
                    Threshold::Greater => false,
                    Threshold::Undecided => norm_at_most(&BigInt::from(n), alpha, eps, &cfg.precision)?,
                },
                Test::Exact => norm_at_most(&BigInt::from(n), alpha, eps, &cfg.precision)?,
            };
            if !inside {
                continue 'next;
            }
        }
        out.push(n);
    }
    Ok(out)
}

fn floor_int(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

fn ceil_int(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

/// Reciprocal of an interval that does not contain zero.
fn recip(iv: &Interval) -> Interval {
    Interval::new(iv.hi.recip(), iv.lo.recip())
}

/// Members of `{n in [lo, hi] : ||n x|| <= eps}` for irrational `x`, found by
/// walking the lattice `{(n, n x - p)}` in the basis of two consecutive
/// convergents. Each lattice point with `|n x - p| <= eps < 1/2` corresponds
/// to exactly one `n`, so no member is produced twice.
fn lattice_members(x: &TorusPoint, eps: &Rational, lo: u64, hi: u64, cfg: &Config) -> Result<Vec<u64>> {
    if lo > hi {
        return Ok(Vec::new());
    }
    let prec = &cfg.precision;
    let hi_big = BigInt::from(hi);
    let convs = x.convergents(&hi_big, prec)?;
    let max_q = convs.last().map(|(_, q)| q.clone()).unwrap_or_else(BigInt::one);
    let eps_bits = ceil_int(&eps.recip()).bits() as u32;
    let k = 2 * max_q.bits() as u32 + eps_bits + 32;
    let xs = Interval::new(int(lo), int(hi));
    let ys = Interval::new(-eps.clone(), eps.clone());

    struct Basis {
        q0: BigInt,
        q1: BigInt,
        y0: Interval,
        y1: Interval,
        det: Rational,
        a_lo: BigInt,
        a_hi: BigInt,
        cost: Rational,
    }

    let mut best: Option<Basis> = None;
    for w in convs.windows(2) {
        let (p0, q0) = &w[0];
        let (p1, q1) = &w[1];
        let y0 = x.value().mul_int(q0).shift(&-p0).enclosure(k);
        let y1 = x.value().mul_int(q1).shift(&-p1).enclosure(k);
        if y1.contains(&Rational::zero()) || y0.contains(&Rational::zero()) {
            continue;
        }
        let det = Rational::from_integer(q1 * p0 - q0 * p1);
        // a = (n y1 - y q1) / det
        let a_iv = xs
            .mul(&y1)
            .sub(&ys.scale(&Rational::from_integer(q1.clone())))
            .scale(&det.recip());
        let a_lo = floor_int(&a_iv.lo);
        let a_hi = ceil_int(&a_iv.hi);
        let per_a_y = (int(2) * eps) / y1.lo.abs().min(y1.hi.abs());
        let per_a_x = Rational::new(BigInt::from(hi - lo), q1.clone());
        let per_a = if per_a_y < per_a_x { per_a_y } else { per_a_x };
        let cost = Rational::from_integer(&a_hi - &a_lo + 1) * (per_a + int(2));
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(Basis {
                q0: q0.clone(),
                q1: q1.clone(),
                y0,
                y1,
                det,
                a_lo,
                a_hi,
                cost,
            });
        }
    }
    let basis = match best {
        Some(b) => b,
        None => return scan_members(std::slice::from_ref(x), eps, lo, hi, cfg),
    };
    if basis.cost > int(cfg.lattice_budget) {
        return Err(Error::budget("lattice walk for Bohr enumeration", cfg.lattice_budget));
    }
    let _ = &basis.det;
    let y1_inv = recip(&basis.y1);
    let q1_rat = Rational::from_integer(basis.q1.clone());
    let mut out = Vec::new();
    let mut a = basis.a_lo.clone();
    while a <= basis.a_hi {
        let a_rat = Rational::from_integer(a.clone());
        let base = &a * &basis.q0;
        // n = a q0 + b q1 in [lo, hi]
        let b_x_lo = ceil_int(&(Rational::from_integer(BigInt::from(lo) - &base) / &q1_rat));
        let b_x_hi = floor_int(&(Rational::from_integer(BigInt::from(hi) - &base) / &q1_rat));
        // y = a y0 + b y1 in [-eps, eps]
        let b_iv = ys.sub(&basis.y0.scale(&a_rat)).mul(&y1_inv);
        let b_lo = std::cmp::max(b_x_lo, floor_int(&b_iv.lo));
        let b_hi = std::cmp::min(b_x_hi, ceil_int(&b_iv.hi));
        let mut b = b_lo;
        while b <= b_hi {
            let n = &base + &b * &basis.q1;
            if let Some(n_u) = n.to_u64() {
                if n_u >= lo && n_u <= hi && norm_at_most(&n, x, eps, &cfg.precision)? {
                    out.push(n_u);
                }
            }
            b += 1;
        }
        a += 1;
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
