//! Covers of Bohr sets by generalized arithmetic progressions
//! `{Σ k_i n_i : 1 <= k_i <= K_i}` with certified containment.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::BohrSet;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::quadratic::Quadratic;
use crate::rational::{int, rat, Rational};
use crate::torus::{norm_enclosure, TorusPoint};

/// Bits of precision for the upper enclosures entering `achieved_a`.
const NORM_BITS: u32 = 96;

/// Most generators the greedy decomposer may introduce.
const GREEDY_MAX_GENERATORS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub n: i64,
    #[serde(rename = "K")]
    pub k: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapCover {
    pub generators: Vec<Generator>,
    /// `max_j Σ K_i ||n_i α_j|| / ε`, exact for rational `α_j` and an upper
    /// enclosure otherwise.
    pub achieved_a: Rational,
    /// `Σ K_i |n_i| / N`.
    pub achieved_b: Rational,
    pub containment_verified: bool,
}

impl GapCover {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Empirical constant `ceil(max(R, a, b, 1))`.
    pub fn c1(&self) -> u64 {
        let m = [
            int(self.rank() as u64),
            self.achieved_a.clone(),
            self.achieved_b.clone(),
            int(1),
        ]
        .into_iter()
        .max()
        .expect("nonempty");
        m.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
    }

    fn score(&self) -> Rational {
        [
            int(self.rank() as u64),
            self.achieved_a.clone(),
            self.achieved_b.clone(),
        ]
        .into_iter()
        .max()
        .expect("nonempty")
    }
}

/// `(achieved_a, achieved_b)` for the given generators.
pub fn achieved_constants(
    alphas: &[TorusPoint],
    eps: &Rational,
    limit: u64,
    gens: &[Generator],
) -> (Rational, Rational) {
    let mut a = Rational::zero();
    for alpha in alphas {
        let sum: Rational = gens
            .iter()
            .map(|g| int(g.k) * norm_enclosure(&BigInt::from(g.n), alpha, NORM_BITS).hi)
            .sum();
        if sum > a {
            a = sum;
        }
    }
    let b: Rational = gens
        .iter()
        .map(|g| int(g.k) * int(g.n.unsigned_abs()))
        .sum::<Rational>()
        / int(limit);
    (a / eps, b)
}

/// Whether every member of `h` is `Σ k_i n_i` with `1 <= k_i <= K_i`.
///
/// Reachable partial sums are tracked exactly; a partial sum is dropped when
/// no member can be completed from it. Fails when more than `budget` states
/// are generated.
pub fn verify_cover_containment(h: &BohrSet, gens: &[Generator], budget: u64) -> Result<bool> {
    let members = h.members();
    if members.is_empty() {
        return Ok(true);
    }
    if gens.is_empty() || gens.iter().any(|g| g.n == 0 || g.k == 0) {
        return Ok(false);
    }
    if let [g] = gens {
        let (n, k) = (g.n as i128, g.k as i128);
        return Ok(members.iter().all(|&m| {
            let m = m as i128;
            m % n == 0 && (1..=k).contains(&(m / n))
        }));
    }
    let targets: Vec<i128> = members.iter().map(|&m| m as i128).collect();
    let ends = |g: &Generator| {
        let (a, b) = (g.n as i128, g.n as i128 * g.k as i128);
        (a.min(b), a.max(b))
    };
    // bounds on what the generators after position i can still add
    let mut rem_min = vec![0i128; gens.len() + 1];
    let mut rem_max = vec![0i128; gens.len() + 1];
    for i in (0..gens.len()).rev() {
        let (lo, hi) = ends(&gens[i]);
        rem_min[i] = rem_min[i + 1] + lo;
        rem_max[i] = rem_max[i + 1] + hi;
    }
    let useful = |s: i128, i: usize| {
        let lo = s + rem_min[i];
        let hi = s + rem_max[i];
        let idx = targets.partition_point(|&m| m < lo);
        idx < targets.len() && targets[idx] <= hi
    };
    let mut states: Vec<i128> = vec![0];
    let mut work: u64 = 0;
    for (i, g) in gens.iter().enumerate() {
        let mut next = Vec::new();
        for &s in &states {
            for k in 1..=g.k as i128 {
                work += 1;
                if work > budget {
                    return Err(Error::budget("cover containment states", budget));
                }
                let v = s + k * g.n as i128;
                if useful(v, i + 1) {
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        states = next;
        if states.is_empty() {
            return Ok(false);
        }
    }
    let reach: HashSet<i128> = states.into_iter().collect();
    Ok(targets.iter().all(|m| reach.contains(m)))
}

/// Certified GAP cover of a nonempty Bohr set, chosen among several
/// candidate constructions by the smallest `max(R, a, b)`.
pub fn decompose_gap(h: &BohrSet, cfg: &Config) -> Result<GapCover> {
    if h.is_empty() {
        return Err(Error::invalid("cannot cover an empty Bohr set"));
    }
    let mut candidates: Vec<Vec<Generator>> = vec![gcd_cover(h)];
    if let Some(alpha) = h.alphas().iter().find(|a| !a.is_rational()) {
        if let Some(c) = lattice_cover(h, alpha, cfg)? {
            candidates.push(c);
        }
    }
    if let Some(c) = greedy_cover(h, cfg) {
        candidates.push(c);
    }
    let mut best: Option<GapCover> = None;
    for gens in candidates {
        let (a, b) = achieved_constants(h.alphas(), h.eps(), h.limit(), &gens);
        let cover = GapCover {
            generators: gens,
            achieved_a: a,
            achieved_b: b,
            containment_verified: false,
        };
        if best.as_ref().is_some_and(|b| b.score() <= cover.score()) {
            continue;
        }
        match verify_cover_containment(h, &cover.generators, cfg.dp_budget) {
            Ok(true) => {
                best = Some(GapCover {
                    containment_verified: true,
                    ..cover
                })
            }
            Ok(false) | Err(Error::BudgetExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| Error::Certificate("no candidate cover passed the containment check".into()))
}

/// Every member is a multiple of `g = gcd(H)` between `g` and `max H`.
fn gcd_cover(h: &BohrSet) -> Vec<Generator> {
    let g = h.members().iter().fold(0u64, |acc, &m| acc.gcd(&m));
    let max = *h.members().last().expect("nonempty");
    vec![Generator {
        n: g as i64,
        k: max / g,
    }]
}

/// Coordinates of the members in the lattice basis given by two consecutive
/// convergent denominators of `alpha`, shifted so that every coordinate is
/// at least one.
fn lattice_cover(h: &BohrSet, alpha: &TorusPoint, cfg: &Config) -> Result<Option<Vec<Generator>>> {
    let limit = BigInt::from(h.limit());
    let convs = alpha.convergents(&limit, &cfg.precision)?;
    let half = Quadratic::rational(rat(1, 2));
    let mut nearest = Vec::with_capacity(h.len());
    for &m in h.members() {
        let x = alpha.value().mul_int(&BigInt::from(m)).add(&half);
        nearest.push(x.floor(cfg.precision.cap)?);
    }
    let mut best: Option<(Rational, Vec<Generator>)> = None;
    for w in convs.windows(2) {
        let (p0, q0) = &w[0];
        let (p1, q1) = &w[1];
        let det = q0 * p1 - q1 * p0;
        let mut coords = Vec::with_capacity(h.len());
        for (&m, p) in h.members().iter().zip(&nearest) {
            let m = BigInt::from(m);
            let a = (&m * p1 - p * q1) * &det;
            let b = (p * q0 - &m * p0) * &det;
            coords.push((a, b));
        }
        let a_lo = coords.iter().map(|c| c.0.clone()).min().expect("nonempty");
        let a_hi = coords.iter().map(|c| c.0.clone()).max().expect("nonempty");
        let b_lo = coords.iter().map(|c| c.1.clone()).min().expect("nonempty");
        let b_hi = coords.iter().map(|c| c.1.clone()).max().expect("nonempty");
        let shift = (&a_lo - 1u32) * q0 + (&b_lo - 1u32) * q1;
        let mut gens = Vec::new();
        for (q, lo, hi) in [(q0, &a_lo, &a_hi), (q1, &b_lo, &b_hi)] {
            let (Some(n), Some(k)) = (q.to_i64(), (hi - lo + 1u32).to_u64()) else {
                continue;
            };
            gens.push(Generator { n, k });
        }
        if gens.len() < 2 {
            continue;
        }
        if !shift.is_zero() {
            let Some(n) = shift.to_i64() else { continue };
            gens.push(Generator { n, k: 1 });
        }
        let (a, b) = achieved_constants(h.alphas(), h.eps(), h.limit(), &gens);
        let score = [int(gens.len() as u64), a, b].into_iter().max().expect("nonempty");
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, gens));
        }
    }
    Ok(best.map(|(_, g)| g))
}

/// Small members become generators until every member is a nonnegative
/// combination of them; the all-ones offset is absorbed by one negative
/// generator with `K = 1`.
fn greedy_cover(h: &BohrSet, cfg: &Config) -> Option<Vec<Generator>> {
    let members = h.members();
    let max = *members.last()? as usize;
    if h.len() < 2 || max as u64 > cfg.dp_budget / 4 {
        return None;
    }
    let mut gens: Vec<u64> = Vec::new();
    // min number of coins and the last coin used, for every value <= max
    let mut coins: Vec<u32> = vec![u32::MAX; max + 1];
    let mut last: Vec<u32> = vec![0; max + 1];
    coins[0] = 0;
    for &m in members {
        if coins[m as usize] != u32::MAX {
            continue;
        }
        if gens.len() == GREEDY_MAX_GENERATORS {
            return None;
        }
        gens.push(m);
        let g = m as usize;
        let idx = gens.len() as u32 - 1;
        for v in g..=max {
            let prev = coins[v - g];
            if prev != u32::MAX && prev + 1 < coins[v] {
                coins[v] = prev + 1;
                last[v] = idx;
            }
        }
    }
    let mut counts = vec![0u64; gens.len()];
    for &m in members {
        let mut per = vec![0u64; gens.len()];
        let mut v = m as usize;
        while v > 0 {
            let i = last[v] as usize;
            per[i] += 1;
            v -= gens[i] as usize;
        }
        for (c, p) in counts.iter_mut().zip(per) {
            *c = (*c).max(p);
        }
    }
    let offset: i64 = gens.iter().map(|&g| g as i64).sum();
    let mut out: Vec<Generator> = gens
        .iter()
        .zip(&counts)
        .map(|(&g, &c)| Generator { n: g as i64, k: c + 1 })
        .collect();
    out.push(Generator { n: -offset, k: 1 });
    Some(out)
}
