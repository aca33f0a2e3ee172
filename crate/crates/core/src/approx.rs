//! Finite group balls, the neighbourhoods `V_t` with their radius schedule,
//! and the searches for `M` and `N`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::bohr::{bohr_members_in, constraint_pieces, ArcSet};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::quadratic::Quadratic;
use crate::rational::{dyadic_floor, floor_log2, int, pow2, rat, Rational};
use crate::torus::{Precision, TorusPoint};

/// Bits of the fixed-point sort keys of ball points.
const KEY_BITS: u32 = 100;

/// Relative guard by which stored `V_t` radii fall short of `δ_t`.
const GUARD_BITS: i64 = 20;

/// `⟨α_1, ..., α_t⟩_M`, sorted by the position of the representative in
/// `[0, 1)`.
#[derive(Clone, Debug)]
pub struct GroupBall {
    alphas: Vec<TorusPoint>,
    m: u64,
    points: Vec<TorusPoint>,
    keys: Vec<u128>,
    index: HashSet<TorusPoint>,
}

impl GroupBall {
    pub fn alphas(&self) -> &[TorusPoint] {
        &self.alphas
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &TorusPoint) -> bool {
        self.index.contains(p)
    }

    /// Indices of points whose key lies in `[lo, hi]` widened by the key error.
    fn candidates(&self, lo: &Rational, hi: &Rational) -> std::ops::Range<usize> {
        let lo_key = key_of_rational(lo).saturating_sub(4);
        let hi_key = key_of_rational(hi).saturating_add(4);
        let start = self.keys.partition_point(|&k| k < lo_key);
        let end = self.keys.partition_point(|&k| k <= hi_key);
        start..end.max(start)
    }
}

fn key_of_rational(x: &Rational) -> u128 {
    if *x <= Rational::zero() {
        return 0;
    }
    (x * int(BigInt::one() << KEY_BITS as usize))
        .floor()
        .to_integer()
        .to_u128()
        .unwrap_or(u128::MAX)
}

/// Within 2 units of `x 2^KEY_BITS` for the representative `x`.
fn key_of_point(p: &TorusPoint) -> u128 {
    key_of_rational(&p.approximant(KEY_BITS))
}

fn exact_cmp(a: &TorusPoint, b: &TorusPoint, cap: u32) -> std::cmp::Ordering {
    match a.value().sub(b.value()).signum(cap) {
        Ok(s) => s.cmp(&0),
        // distinct quadratic irrationals always separate well before the cap
        Err(_) => std::cmp::Ordering::Equal,
    }
}

/// All combinations `Σ k_i α_i` with `|k_i| <= M`, deduplicated exactly.
pub fn enumerate_group_ball(alphas: &[TorusPoint], m: u64, cfg: &Config) -> Result<GroupBall> {
    if alphas.is_empty() {
        return Err(Error::invalid("at least one generator is required"));
    }
    if m == 0 {
        return Err(Error::invalid("M must be positive"));
    }
    let side = 2 * m as u128 + 1;
    let total = side.checked_pow(alphas.len() as u32).unwrap_or(u128::MAX);
    if total > cfg.ball_budget as u128 {
        return Err(Error::budget(
            format!("group ball with M = {m} over {} generators", alphas.len()),
            cfg.ball_budget,
        ));
    }
    let mut index: HashSet<TorusPoint> = HashSet::new();
    let mut points = Vec::new();
    let multiples: Vec<Vec<TorusPoint>> = alphas
        .iter()
        .map(|a| (-(m as i64)..=m as i64).map(|k| a.mul_int(&BigInt::from(k))).collect())
        .collect();
    let mut coords = vec![0usize; alphas.len()];
    loop {
        let mut p = TorusPoint::zero();
        for (i, &c) in coords.iter().enumerate() {
            p = p.add(&multiples[i][c]);
        }
        if index.insert(p.clone()) {
            points.push(p);
        }
        let mut i = 0;
        loop {
            if i == coords.len() {
                return Ok(finish_ball(alphas, m, points, index, &cfg.precision));
            }
            coords[i] += 1;
            if coords[i] < side as usize {
                break;
            }
            coords[i] = 0;
            i += 1;
        }
    }
}

fn finish_ball(
    alphas: &[TorusPoint],
    m: u64,
    points: Vec<TorusPoint>,
    index: HashSet<TorusPoint>,
    prec: &Precision,
) -> GroupBall {
    let mut keyed: Vec<(u128, TorusPoint)> = points.into_iter().map(|p| (key_of_point(&p), p)).collect();
    keyed.sort_by(|(ka, a), (kb, b)| {
        if ka.abs_diff(*kb) >= 4 {
            ka.cmp(kb)
        } else {
            exact_cmp(a, b, prec.cap)
        }
    });
    let (keys, points) = keyed.into_iter().unzip();
    GroupBall {
        alphas: alphas.to_vec(),
        m,
        points,
        keys,
        index,
    }
}

/// Lower bound `L` on a positive quadratic number `x` with `x/2 <= L <= x`.
fn half_tight_lower(x: &Quadratic, prec: &Precision, what: &str) -> Result<Rational> {
    if x.is_rational() {
        return Ok(x.constant().clone());
    }
    for k in prec.levels(32) {
        let e = x.enclosure(k);
        if e.lo > Rational::zero() && e.hi <= &e.lo * int(2) {
            return Ok(e.lo);
        }
    }
    Err(Error::PrecisionCap {
        context: what.to_string(),
        cap: prec.cap,
    })
}

/// Circular gap from `a` forward to `b`, as an exact quadratic number in `(0, 1]`.
fn forward_gap(a: &TorusPoint, b: &TorusPoint) -> Quadratic {
    let d = b.sub(a);
    if d.is_zero() {
        Quadratic::rational(Rational::one())
    } else {
        d.value().clone()
    }
}

/// Certified lower bound on the smallest distance between two distinct
/// ball points, within a factor two of the truth (exact for rational balls).
pub fn min_gap(ball: &GroupBall, prec: &Precision) -> Result<Rational> {
    let n = ball.points.len();
    if n < 2 {
        return Err(Error::invalid("min_gap needs at least two points"));
    }
    let mut best: Option<Rational> = None;
    for i in 0..n {
        let gap = forward_gap(&ball.points[i], &ball.points[(i + 1) % n]);
        let lo = half_tight_lower(&gap, prec, "separating ball points")?;
        if best.as_ref().is_none_or(|b| lo < *b) {
            best = Some(lo);
        }
    }
    Ok(best.expect("n >= 2"))
}

/// Certified lower bound on `min ||α - α'||` over `α` in `ball` and `α'` in
/// `next \ ball`; `None` when `next` adds no points.
pub fn cross_gap(ball: &GroupBall, next: &GroupBall, prec: &Precision) -> Result<Option<Rational>> {
    let n = next.points.len();
    let fresh: Vec<usize> = (0..n).filter(|&i| !ball.contains(&next.points[i])).collect();
    if fresh.is_empty() {
        return Ok(None);
    }
    // Merge both sorted lists; each fresh point only needs its nearest old
    // neighbour on either side.
    let mut merged: Vec<(&TorusPoint, u128, bool)> = Vec::with_capacity(ball.len() + fresh.len());
    merged.extend(ball.points.iter().zip(&ball.keys).map(|(p, &k)| (p, k, false)));
    merged.extend(fresh.iter().map(|&i| (&next.points[i], next.keys[i], true)));
    merged.sort_by(|(a, ka, _), (b, kb, _)| {
        if ka.abs_diff(*kb) >= 4 {
            ka.cmp(kb)
        } else {
            exact_cmp(a, b, prec.cap)
        }
    });
    let len = merged.len();
    let mut best: Option<Rational> = None;
    for i in 0..len {
        if !merged[i].2 {
            continue;
        }
        let mut pairs = Vec::new();
        if let Some(j) = (1..len).map(|s| (i + len - s) % len).find(|&j| !merged[j].2) {
            pairs.push(forward_gap(merged[j].0, merged[i].0));
        }
        if let Some(j) = (1..len).map(|s| (i + s) % len).find(|&j| !merged[j].2) {
            pairs.push(forward_gap(merged[i].0, merged[j].0));
        }
        for gap in pairs {
            let lo = half_tight_lower(&gap, prec, "separating consecutive balls")?;
            if best.as_ref().is_none_or(|b| lo < *b) {
                best = Some(lo);
            }
        }
    }
    Ok(best)
}

/// Largest power of two strictly below `x > 0`.
fn dyadic_below(x: &Rational) -> Rational {
    let d = dyadic_floor(x);
    if d == *x {
        d / int(2)
    } else {
        d
    }
}

/// Constraints on the radius of stage `t`.
#[derive(Clone, Debug, Default)]
pub struct DeltaConstraints {
    /// Radius of the previous stage, if any.
    pub prev_delta: Option<Rational>,
    /// Cross gap between the previous ball and this one.
    pub back_cross: Option<Rational>,
    /// Cross gap between this ball and the lookahead ball.
    pub forward_cross: Option<Rational>,
}

/// Largest dyadic `δ` with `2δ < min_gap`, `δ <= δ_prev / 2`,
/// `δ_prev + δ < back_cross`, and `δ + δ/2 < forward_cross`, the last one
/// leaving room for a successor radius of at most `δ/2`.
pub fn plan_delta(ball: &GroupBall, constraints: &DeltaConstraints, prec: &Precision) -> Result<Rational> {
    let mut delta = if ball.len() >= 2 {
        dyadic_below(&(min_gap(ball, prec)? / int(2)))
    } else {
        rat(1, 4)
    };
    if let Some(prev) = &constraints.prev_delta {
        let cap = prev / int(2);
        if cap < delta {
            delta = cap;
        }
        if let Some(back) = &constraints.back_cross {
            let room = back - prev;
            if room <= Rational::zero() {
                return Err(Error::Certificate(format!(
                    "previous radius {prev} leaves no room below the cross gap {back}"
                )));
            }
            let cap = dyadic_below(&room);
            if cap < delta {
                delta = cap;
            }
        }
    }
    if let Some(fwd) = &constraints.forward_cross {
        let cap = dyadic_below(&(fwd * rat(2, 3)));
        if cap < delta {
            delta = cap;
        }
    }
    Ok(delta)
}

/// Closed arcs around every ball point whose radius falls short of `δ` by a
/// relative guard, so that they sit inside the open `δ`-neighbourhood.
pub fn neighbourhood(ball: &GroupBall, delta: &Rational) -> ArcSet {
    let radius = delta * (Rational::one() - pow2(-GUARD_BITS));
    let bits = (-floor_log2(delta)).max(0) as u32 + GUARD_BITS as u32 + 2;
    // centre error <= δ 2^-(GUARD+2), so radius + error < δ
    let centres = ball.points.iter().map(|p| match p.as_rational() {
        Some(x) => x.clone(),
        None => p.approximant(bits),
    });
    ArcSet::from_arcs_around(centres, &radius)
}

/// One stage of the approximation scheme.
#[derive(Clone, Debug)]
pub struct StagePlan {
    pub t: usize,
    pub m: u64,
    pub delta: Rational,
    pub v: ArcSet,
    pub eps: Rational,
    pub n: u64,
}

/// Whether `p` lies in `[a, b]`, refining irrational enclosures.
fn point_in_interval(p: &TorusPoint, a: &Rational, b: &Rational, prec: &Precision) -> Result<bool> {
    if let Some(x) = p.as_rational() {
        return Ok(a <= x && x <= b);
    }
    for k in prec.levels(KEY_BITS) {
        let e = p.enclosure(k);
        if *a <= e.lo && e.hi <= *b {
            return Ok(true);
        }
        if e.hi < *a || e.lo > *b {
            return Ok(false);
        }
    }
    Err(Error::PrecisionCap {
        context: "locating a ball point against an arc".into(),
        cap: prec.cap,
    })
}

fn ball_meets(ball: &GroupBall, a: &Rational, b: &Rational, prec: &Precision) -> Result<bool> {
    for i in ball.candidates(a, b) {
        if point_in_interval(&ball.points[i], a, b, prec)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether every arc of `s` contains a point of the ball.
pub fn ball_meets_every_arc(ball: &GroupBall, s: &ArcSet, prec: &Precision) -> Result<bool> {
    for arc in s.arcs() {
        let hit = if arc.wraps {
            ball_meets(ball, &arc.start, &Rational::one(), prec)?
                || ball_meets(ball, &Rational::zero(), &arc.end, prec)?
        } else {
            ball_meets(ball, &arc.start, &arc.end, prec)?
        };
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

fn sixth() -> Rational {
    rat(1, 6)
}

/// Searches for `N` with `{β : ||β H_{N,ε}|| <= 1/6} ⊆ V`: doubling, then
/// bisection inside the last bracket. Pieces already inside `V` are dropped
/// as soon as they appear, since later constraints only shrink them.
pub fn find_n(alphas: &[TorusPoint], eps: &Rational, v: &ArcSet, cfg: &Config) -> Result<u64> {
    if v.is_full() {
        return Ok(1);
    }
    let apply = |pieces: Vec<(Rational, Rational)>, lo: u64, hi: u64| -> Result<Vec<(Rational, Rational)>> {
        let mut pieces = pieces;
        for n in bohr_members_in(alphas, eps, lo, hi, cfg)? {
            pieces = constraint_pieces(&pieces, n, &sixth(), cfg.arc_budget)?;
            pieces.retain(|p| !v.covers_piece(p));
            if pieces.is_empty() {
                break;
            }
        }
        Ok(pieces)
    };
    let mut state = vec![(Rational::zero(), Rational::one())];
    let mut done: u64 = 0;
    let mut n: u64 = 1;
    let (bracket_lo, lo_state) = loop {
        if n > cfg.n_budget {
            let (a, b) = state.first().cloned().unwrap_or_default();
            return Err(Error::budget(
                format!("search for N; [{a}, {b}] still escapes V at N = {done}"),
                cfg.n_budget,
            ));
        }
        let next = apply(state.clone(), done + 1, n)?;
        if next.is_empty() {
            break (done, state);
        }
        state = next;
        done = n;
        n = n.saturating_mul(2);
    };
    // smallest N in (bracket_lo, n] whose set is covered
    let (mut lo, mut hi) = (bracket_lo, n);
    let mut lo_state = lo_state;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let s = apply(lo_state.clone(), lo + 1, mid)?;
        if s.is_empty() {
            hi = mid;
        } else {
            lo = mid;
            lo_state = s;
        }
    }
    Ok(hi.max(1))
}

/// `{β : ||β H_{N,ε}|| <= 1/6}` for the given `N`.
pub fn small_norm_set(alphas: &[TorusPoint], eps: &Rational, limit: u64, cfg: &Config) -> Result<ArcSet> {
    let mut pieces = vec![(Rational::zero(), Rational::one())];
    for n in bohr_members_in(alphas, eps, 1, limit, cfg)? {
        pieces = constraint_pieces(&pieces, n, &sixth(), cfg.arc_budget)?;
    }
    Ok(ArcSet::from_pieces(pieces))
}

/// Whether `V` contains the solution set at `N`.
pub fn certify_n(alphas: &[TorusPoint], eps: &Rational, v: &ArcSet, limit: u64, cfg: &Config) -> Result<bool> {
    Ok(v.contains(&small_norm_set(alphas, eps, limit, cfg)?))
}

/// Smallest `M` (within a doubling bracket) whose ball meets every arc of
/// `s` and whose points are farther apart than every arc is long.
fn localizing_m(alphas: &[TorusPoint], s: &ArcSet, cfg: &Config) -> Result<Option<u64>> {
    let prec = &cfg.precision;
    let arcs = s.arcs();
    let t = alphas.len() as u32;
    // the ball needs at least one point per arc
    let mut m: u64 = 1;
    while (2 * m as u128 + 1).pow(t) < arcs.len() as u128 {
        m *= 2;
    }
    let fits = |m: u64| {
        (2 * m as u128 + 1)
            .checked_pow(t)
            .is_some_and(|v| v <= cfg.ball_budget as u128)
    };
    let longest = arcs.iter().map(|a| a.length()).max().unwrap_or_default();
    let mut tries = 0;
    while fits(m) && tries < 3 {
        let ball = enumerate_group_ball(alphas, m, cfg)?;
        if ball_meets_every_arc(&ball, s, prec)? {
            let (mut lo, mut hi) = (m / 2, m);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ball_meets_every_arc(&enumerate_group_ball(alphas, mid, cfg)?, s, prec)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let ball = enumerate_group_ball(alphas, hi, cfg)?;
            let gap = if ball.len() >= 2 {
                min_gap(&ball, prec)?
            } else {
                Rational::one()
            };
            return Ok((longest < gap).then_some(hi));
        }
        m *= 2;
        tries += 1;
    }
    Ok(None)
}

/// Probes `N = 1, 2, 4, ...` until the solution set of the `N`-th Bohr
/// constraints is localized around a group ball, and returns its radius `M`.
pub fn find_m(alphas: &[TorusPoint], eps: &Rational, cfg: &Config) -> Result<u64> {
    let mut pieces = vec![(Rational::zero(), Rational::one())];
    let mut done: u64 = 0;
    let mut n: u64 = 1;
    // the arc budget covers every intersection of the search, not one
    let mut used: u64 = 0;
    while n <= cfg.n_budget {
        for h in bohr_members_in(alphas, eps, done + 1, n, cfg)? {
            let left = cfg.arc_budget.saturating_sub(used);
            pieces = constraint_pieces(&pieces, h, &sixth(), left)
                .map_err(|_| Error::budget("arc pieces for the search for M", cfg.arc_budget))?;
            used += pieces.len() as u64;
        }
        done = n;
        let s = ArcSet::from_pieces(pieces.clone());
        if (s.len() as u64) <= cfg.ball_budget {
            if let Some(m) = localizing_m(alphas, &s, cfg)? {
                return Ok(m);
            }
        }
        n = n.saturating_mul(2);
    }
    Err(Error::budget(
        format!(
            "search for M; {} arcs not localized at N = {done}",
            ArcSet::from_pieces(pieces).len()
        ),
        cfg.n_budget,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{make_point, PointDescriptor};

    fn r(n: i64, d: i64) -> TorusPoint {
        TorusPoint::rational(rat(n, d))
    }

    fn sqrt2() -> TorusPoint {
        make_point(&PointDescriptor::Sqrt {
            radicand: 2,
            p: None,
            q: None,
        })
        .unwrap()
    }

    fn positions(ball: &GroupBall) -> Vec<Rational> {
        ball.points().iter().map(|p| p.as_rational().unwrap().clone()).collect()
    }

    #[test]
    fn balls() {
        let cfg = Config::default();
        let b = enumerate_group_ball(&[r(1, 3)], 1, &cfg).unwrap();
        assert_eq!(positions(&b), vec![rat(0, 1), rat(1, 3), rat(2, 3)]);
        let b = enumerate_group_ball(&[r(1, 2), r(1, 3)], 1, &cfg).unwrap();
        assert_eq!(positions(&b), (0..6).map(|k| rat(k, 6)).collect::<Vec<_>>());
        let b = enumerate_group_ball(&[sqrt2()], 2, &cfg).unwrap();
        assert_eq!(b.len(), 5);
        let xs: Vec<f64> = b.points().iter().map(|p| p.approximant(60).to_f64().unwrap()).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "{xs:?}");
        assert!(b.contains(&sqrt2().mul_int(&BigInt::from(-2))));
    }

    #[test]
    fn ball_budget() {
        let cfg = Config {
            ball_budget: 100,
            ..Config::default()
        };
        assert!(matches!(
            enumerate_group_ball(&[r(1, 7), r(1, 11)], 5, &cfg),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn gaps() {
        let cfg = Config::default();
        let p = &cfg.precision;
        assert_eq!(
            min_gap(&enumerate_group_ball(&[r(1, 3)], 1, &cfg).unwrap(), p).unwrap(),
            rat(1, 3)
        );
        assert_eq!(
            min_gap(&enumerate_group_ball(&[r(1, 2), r(1, 3)], 1, &cfg).unwrap(), p).unwrap(),
            rat(1, 6)
        );
        assert!(min_gap(&enumerate_group_ball(&[r(0, 1)], 1, &cfg).unwrap(), p).is_err());
        let b = enumerate_group_ball(&[sqrt2()], 3, &cfg).unwrap();
        let l = min_gap(&b, p).unwrap();
        // true minimum is 5 sqrt2 - 7 = 0.07106...
        assert!(l <= rat(7107, 100000) && l * int(2) >= rat(7106, 100000));
    }

    #[test]
    fn cross_gaps() {
        let cfg = Config::default();
        let p = &cfg.precision;
        let a = enumerate_group_ball(&[r(1, 2)], 1, &cfg).unwrap();
        assert_eq!(cross_gap(&a, &a, p).unwrap(), None);
        let b = enumerate_group_ball(&[r(1, 2), r(1, 3)], 1, &cfg).unwrap();
        assert_eq!(cross_gap(&a, &b, p).unwrap(), Some(rat(1, 6)));
    }

    #[test]
    fn deltas() {
        let cfg = Config::default();
        let p = &cfg.precision;
        let half = enumerate_group_ball(&[r(1, 2)], 1, &cfg).unwrap();
        let d = plan_delta(&half, &DeltaConstraints::default(), p).unwrap();
        assert_eq!(d, rat(1, 8));
        let sixths = enumerate_group_ball(&[r(1, 2), r(1, 3)], 1, &cfg).unwrap();
        assert_eq!(
            plan_delta(&sixths, &DeltaConstraints::default(), p).unwrap(),
            rat(1, 16)
        );
        let c = DeltaConstraints {
            forward_cross: Some(rat(1, 6)),
            ..Default::default()
        };
        // 1.5 δ < 1/6 gives δ < 1/9
        assert_eq!(plan_delta(&half, &c, p).unwrap(), rat(1, 16));
        let c = DeltaConstraints {
            prev_delta: Some(rat(1, 8)),
            back_cross: Some(rat(1, 6)),
            forward_cross: None,
        };
        assert_eq!(plan_delta(&sixths, &c, p).unwrap(), rat(1, 32));
        let zero = enumerate_group_ball(&[r(0, 1)], 1, &cfg).unwrap();
        assert_eq!(plan_delta(&zero, &DeltaConstraints::default(), p).unwrap(), rat(1, 4));
    }

    #[test]
    fn neighbourhood_is_inside_open_radius() {
        let cfg = Config::default();
        let b = enumerate_group_ball(&[sqrt2()], 2, &cfg).unwrap();
        let d = rat(1, 32);
        let v = neighbourhood(&b, &d);
        assert_eq!(v.len(), 5);
        for p in b.points() {
            assert_eq!(v.member(p, &cfg.precision), crate::bohr::Membership::Inside);
        }
        assert!(v.total_length() < int(10) * d);
    }

    #[test]
    fn find_n_examples() {
        let cfg = Config::default();
        let half = enumerate_group_ball(&[r(1, 2)], 1, &cfg).unwrap();
        let v = ArcSet::from_arcs_around(positions(&half), &rat(1, 10));
        assert_eq!(find_n(&[r(1, 2)], &rat(1, 4), &v, &cfg).unwrap(), 2);
        assert_eq!(find_n(&[r(1, 2)], &rat(1, 4), &ArcSet::full(), &cfg).unwrap(), 1);
        let thirds = ArcSet::from_arcs_around([rat(0, 1), rat(1, 3), rat(2, 3)], &rat(1, 20));
        let n = find_n(&[r(1, 3)], &rat(1, 10), &thirds, &cfg).unwrap();
        assert_eq!(n, 6);
        assert!(certify_n(&[r(1, 3)], &rat(1, 10), &thirds, n, &cfg).unwrap());
        assert!(!certify_n(&[r(1, 3)], &rat(1, 10), &thirds, n - 1, &cfg).unwrap());
    }

    #[test]
    fn find_m_examples() {
        let cfg = Config::default();
        assert_eq!(find_m(&[r(1, 2)], &rat(1, 4), &cfg).unwrap(), 1);
        assert_eq!(find_m(&[r(1, 3)], &rat(1, 10), &cfg).unwrap(), 1);
        assert_eq!(find_m(&[r(0, 1)], &rat(1, 10), &cfg).unwrap(), 1);
    }

    #[test]
    fn find_m_for_sqrt2_covers_small_multiples() {
        let cfg = Config::default();
        let eps = rat(1, 64);
        let m = find_m(&[sqrt2()], &eps, &cfg).unwrap();
        // kα with |k| <= 1/(6ε) always survives every constraint
        assert!(m >= 10, "m = {m}");
        let ball = enumerate_group_ball(&[sqrt2()], m, &cfg).unwrap();
        let d = plan_delta(&ball, &DeltaConstraints::default(), &cfg.precision).unwrap();
        let v = neighbourhood(&ball, &d);
        let n = find_n(&[sqrt2()], &eps, &v, &cfg).unwrap();
        assert!(certify_n(&[sqrt2()], &eps, &v, n, &cfg).unwrap());
    }
}
