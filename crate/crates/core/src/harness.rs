//! Verification of built sequences against declared members and
//! non-members, plus brute-force oracles used by the tests.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::bohr::ArcSet;
use crate::builder::{SequenceBuild, StageArtifacts};
use crate::error::{Error, Result};
use crate::rational::{dist_to_int, int, pow_bounds, rat, Rational};
use crate::torus::{approx_f64, norm_enclosure, NormInterval, Precision, Threshold, TorusPoint};

/// Bits used for the first enclosure of every norm.
const FIRST_BITS: u32 = 64;

/// What the harness needs to know about one built stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSummary {
    pub t: usize,
    pub members: Vec<u64>,
    /// Upper bound on `C_2 ε_t^{1/t} / (2^{1/t} - 1)`.
    pub term: Rational,
}

impl From<&StageArtifacts> for StageSummary {
    fn from(s: &StageArtifacts) -> Self {
        StageSummary {
            t: s.t(),
            members: s.members().to_vec(),
            term: s.term.clone(),
        }
    }
}

pub fn summaries(build: &SequenceBuild) -> Vec<StageSummary> {
    build.stages.iter().map(StageSummary::from).collect()
}

/// A point declared to be `Σ c_j g_j` for the group generators `g_j`.
#[derive(Clone, Debug)]
pub struct MemberDecl {
    pub point: TorusPoint,
    pub combination: Vec<i64>,
}

impl MemberDecl {
    /// Builds the point from its combination; when `point` is also given it
    /// must agree exactly.
    pub fn new(generators: &[TorusPoint], combination: Vec<i64>, point: Option<TorusPoint>) -> Result<Self> {
        if combination.len() > generators.len() {
            return Err(Error::invalid(format!(
                "combination has {} coefficients but the group has {} generators",
                combination.len(),
                generators.len()
            )));
        }
        let value = combination
            .iter()
            .zip(generators)
            .fold(TorusPoint::zero(), |acc, (&c, g)| acc.add(&g.mul_int(&BigInt::from(c))));
        if let Some(p) = point {
            if p != value {
                return Err(Error::invalid(format!(
                    "declared point {p} differs from the combination {value}"
                )));
            }
        }
        Ok(MemberDecl {
            point: value,
            combination,
        })
    }

    /// One-based index of the last generator with a nonzero coefficient
    /// (0 for the zero combination).
    pub fn last_generator(&self) -> usize {
        self.combination.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1)
    }
}

/// First stage of the tail: the smallest integer `m > max(t_0, 1/r)`.
pub fn tail_start(t0: usize, r: &Rational) -> usize {
    let inv = r.recip();
    let bound = if int(t0 as u64) > inv { int(t0 as u64) } else { inv };
    (bound.floor().to_integer() + 1u32).to_usize().unwrap_or(usize::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Member,
    Nonmember,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberRow {
    pub t: usize,
    pub n: u64,
    pub norm_hi: Rational,
    pub partial_sum_hi: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberStage {
    pub t: usize,
    /// Upper bound on `Σ_{n∈S_t} ||nβ||^r`.
    pub stage_sum_hi: Rational,
    /// Upper bound on the sum over `S_1, ..., S_t`.
    pub partial_sum_hi: Rational,
    pub term: Rational,
    pub in_tail: bool,
}

impl MemberStage {
    /// For tail stages, whether the contribution is within `term_t`.
    pub fn within_term(&self) -> bool {
        !self.in_tail || self.stage_sum_hi <= self.term
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessStage {
    pub t: usize,
    pub witness_n: Option<u64>,
    /// Largest certified lower bound on `||nβ||` over `S_t`.
    pub witness_norm_lo: Rational,
}

#[derive(Clone, Debug)]
pub enum Rows {
    Member {
        r: Rational,
        tail_start: usize,
        rows: Vec<MemberRow>,
        stages: Vec<MemberStage>,
        /// `Σ term_t` over built tail stages.
        tail_bound: Rational,
    },
    Nonmember {
        threshold: Rational,
        stages: Vec<WitnessStage>,
    },
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub beta: TorusPoint,
    pub rows: Rows,
}

impl VerificationReport {
    pub fn mode(&self) -> Mode {
        match self.rows {
            Rows::Member { .. } => Mode::Member,
            Rows::Nonmember { .. } => Mode::Nonmember,
        }
    }

    /// Member mode: every tail stage within `term_t`, and at least one tail
    /// stage was built. Non-member mode: at least one witness.
    pub fn passed(&self) -> bool {
        match &self.rows {
            Rows::Member { stages, .. } => {
                stages.iter().any(|s| s.in_tail) && stages.iter().all(MemberStage::within_term)
            }
            Rows::Nonmember { stages, .. } => stages.iter().any(|s| s.witness_n.is_some()),
        }
    }

    pub fn verdict(&self) -> String {
        match &self.rows {
            Rows::Member {
                stages,
                tail_start,
                tail_bound,
                ..
            } => {
                let tail: Vec<_> = stages.iter().filter(|s| s.in_tail).collect();
                if tail.is_empty() {
                    return format!("no tail stage built (tail starts at t = {tail_start})");
                }
                let bad: Vec<usize> = tail.iter().filter(|s| !s.within_term()).map(|s| s.t).collect();
                if bad.is_empty() {
                    format!(
                        "tail stages {}..={} each within term_t; tail bound {:.6}",
                        tail_start,
                        tail.last().map_or(0, |s| s.t),
                        approx_f64(tail_bound)
                    )
                } else {
                    format!("tail stages exceeding term_t: {bad:?}")
                }
            }
            Rows::Nonmember { stages, .. } => {
                let hits: Vec<usize> = stages.iter().filter(|s| s.witness_n.is_some()).map(|s| s.t).collect();
                if hits.is_empty() {
                    "no witness found".to_string()
                } else {
                    format!("witnesses in stages {hits:?}")
                }
            }
        }
    }
}

fn norm_upper(n: u64, beta: &TorusPoint) -> Rational {
    norm_enclosure(&BigInt::from(n), beta, FIRST_BITS).hi
}

/// Per-stage upper bounds on `Σ_{n∈S_t} ||nβ||^r` for a declared member,
/// checked against `term_t` on the tail `t >= m`, `m > max(t_0, 1/r)`.
pub fn verify_member(stages: &[StageSummary], beta: &MemberDecl, r: &Rational) -> Result<VerificationReport> {
    if *r <= Rational::zero() {
        return Err(Error::invalid("r must be positive"));
    }
    let start = tail_start(beta.last_generator(), r);
    let mut rows = Vec::new();
    let mut out = Vec::new();
    let mut partial = Rational::zero();
    let mut tail_bound = Rational::zero();
    for s in stages {
        let mut stage_sum = Rational::zero();
        for &n in &s.members {
            let hi = norm_upper(n, &beta.point);
            let term = if hi.is_zero() {
                Rational::zero()
            } else {
                pow_bounds(&hi, r, FIRST_BITS).1
            };
            stage_sum += &term;
            partial += &term;
            rows.push(MemberRow {
                t: s.t,
                n,
                norm_hi: hi,
                partial_sum_hi: partial.clone(),
            });
        }
        let in_tail = s.t >= start;
        if in_tail {
            tail_bound += &s.term;
        }
        out.push(MemberStage {
            t: s.t,
            stage_sum_hi: stage_sum,
            partial_sum_hi: partial.clone(),
            term: s.term.clone(),
            in_tail,
        });
    }
    Ok(VerificationReport {
        beta: beta.point.clone(),
        rows: Rows::Member {
            r: r.clone(),
            tail_start: start,
            rows,
            stages: out,
            tail_bound,
        },
    })
}

/// Certified lower bound on `||nβ||`, refined while it straddles `threshold`.
fn norm_lower(n: u64, beta: &TorusPoint, threshold: &Rational, prec: &Precision) -> Result<Rational> {
    let big = BigInt::from(n);
    let mut last: Option<NormInterval> = None;
    for bits in prec.levels(FIRST_BITS) {
        let e = norm_enclosure(&big, beta, bits);
        if e.is_exact() || e.cmp_threshold(threshold) != Threshold::Undecided {
            return Ok(e.lo);
        }
        last = Some(e);
    }
    match last {
        Some(_) => Err(Error::PrecisionCap {
            context: format!("comparing ||{n} beta|| with {threshold}"),
            cap: prec.cap,
        }),
        None => Ok(Rational::zero()),
    }
}

/// For each stage, the element of `S_t` with the largest certified lower
/// bound on `||nβ||`; it is a witness when that bound reaches `threshold`.
pub fn verify_nonmember(
    stages: &[StageSummary],
    beta: &TorusPoint,
    threshold: &Rational,
    prec: &Precision,
) -> Result<VerificationReport> {
    let mut out = Vec::new();
    for s in stages {
        let mut best: Option<(u64, Rational)> = None;
        for &n in &s.members {
            let lo = norm_lower(n, beta, threshold, prec)?;
            if best.as_ref().is_none_or(|(_, b)| lo > *b) {
                best = Some((n, lo));
            }
        }
        let (n, lo) = best.unwrap_or((0, Rational::zero()));
        out.push(WitnessStage {
            t: s.t,
            witness_n: (lo >= *threshold && n > 0).then_some(n),
            witness_norm_lo: lo,
        });
    }
    Ok(VerificationReport {
        beta: beta.clone(),
        rows: Rows::Nonmember {
            threshold: threshold.clone(),
            stages: out,
        },
    })
}

/// The default witness threshold.
pub fn sixth() -> Rational {
    rat(1, 6)
}

/// Naive enumeration of `{n <= N : ||n α_j|| <= ε}` for rational `α_j`.
pub fn oracle_bohr(alphas: &[Rational], eps: &Rational, limit: u64) -> Vec<u64> {
    (1..=limit)
        .filter(|&n| {
            let n = int(n);
            alphas.iter().all(|a| dist_to_int(&(&n * a)) <= *eps)
        })
        .collect()
}

/// Membership of the grid points `k / q`, `k = 0..q`, read off the arcs of
/// the set one by one.
pub fn oracle_arcs_membership(set: &ArcSet, grid_q: u64) -> Vec<bool> {
    if grid_q == 0 {
        return Vec::new();
    }
    let q = int(grid_q);
    let mut bits = vec![false; grid_q as usize];
    let mut mark = |lo: &Rational, hi: &Rational| {
        // grid points k with lo <= k/q <= hi
        let first = (lo * &q).ceil().to_integer().to_u64().unwrap_or(0);
        let last = (hi * &q).floor().to_integer().to_u64().unwrap_or(0);
        for k in first..=last.min(grid_q - 1) {
            bits[k as usize] = true;
        }
    };
    for a in set.arcs() {
        if a.wraps {
            mark(&a.start, &Rational::one());
            mark(&Rational::zero(), &a.end);
        } else {
            mark(&a.start, &a.end);
        }
    }
    bits
}

/// `||n k / q||` compared with `c`, in integers.
fn grid_norm_cmp(n: u64, k: u64, grid_q: u64, c: &Rational) -> std::cmp::Ordering {
    let r = (n as u128 * k as u128 % grid_q as u128) as u64;
    let dist = BigInt::from(r.min(grid_q - r));
    (dist * c.denom()).cmp(&(c.numer() * BigInt::from(grid_q)))
}

/// Grid points `k / q` satisfying `||n k/q|| <= c` for every `n`, evaluated
/// directly.
pub fn oracle_constraints(ns: &[u64], c: &Rational, grid_q: u64) -> Vec<bool> {
    (0..grid_q)
        .map(|k| ns.iter().all(|&n| grid_norm_cmp(n, k, grid_q, c).is_le()))
        .collect()
}

/// Whether `k / q` lies on an arc endpoint of `||n β|| <= c` for some `n`.
pub fn on_constraint_boundary(ns: &[u64], c: &Rational, k: u64, grid_q: u64) -> bool {
    ns.iter().any(|&n| grid_norm_cmp(n, k, grid_q, c).is_eq())
}

/// `min(1/6, ||β H||) <= ||β S||` for rational `β`, evaluated exactly.
pub fn transfer_holds(h: &[u64], s: &[u64], beta: &Rational) -> bool {
    let sup = |set: &[u64]| {
        set.iter()
            .map(|&n| dist_to_int(&(int(n) * beta)))
            .max()
            .unwrap_or_default()
    };
    let lhs = sup(h);
    let lhs = if lhs < sixth() { lhs } else { sixth() };
    lhs <= sup(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::stream_sequence;
    use crate::config::Config;
    use crate::torus::{make_point, PointDescriptor};

    fn r(n: i64, d: i64) -> TorusPoint {
        TorusPoint::rational(rat(n, d))
    }

    #[test]
    fn oracles() {
        assert_eq!(oracle_bohr(&[rat(1, 3)], &rat(1, 10), 10), vec![3, 6, 9]);
        assert!(oracle_arcs_membership(&ArcSet::full(), 10).iter().all(|&b| b));
        let s = ArcSet::around(&rat(0, 1), &rat(1, 12));
        let bits = oracle_arcs_membership(&s, 12);
        let ones: Vec<usize> = bits.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k).collect();
        assert_eq!(ones, vec![0, 1, 11]);
        assert_eq!(oracle_constraints(&[1, 2], &rat(1, 6), 12), bits);
    }

    #[test]
    fn tail_start_examples() {
        assert_eq!(tail_start(1, &rat(1, 2)), 3);
        assert_eq!(tail_start(2, &rat(1, 2)), 3);
        assert_eq!(tail_start(0, &rat(1, 1)), 2);
        assert_eq!(tail_start(4, &rat(1, 3)), 5);
    }

    #[test]
    fn member_declarations() {
        let gens = [r(1, 2), r(1, 3)];
        let d = MemberDecl::new(&gens, vec![-1, 2], Some(r(1, 6))).unwrap();
        assert_eq!(d.last_generator(), 2);
        assert!(MemberDecl::new(&gens, vec![1], Some(r(1, 3))).is_err());
        assert!(MemberDecl::new(&gens, vec![1, 1, 1], None).is_err());
        let s2 = make_point(&PointDescriptor::Sqrt {
            radicand: 2,
            p: None,
            q: None,
        })
        .unwrap();
        let two = make_point(&PointDescriptor::Sqrt {
            radicand: 2,
            p: None,
            q: Some(crate::torus::RationalField::Int(2)),
        })
        .unwrap();
        assert!(MemberDecl::new(&[s2], vec![2], Some(two)).is_ok());
    }

    #[test]
    fn half_group_reports() {
        let cfg = Config::default();
        let build = stream_sequence(vec![r(1, 2)], 3, &cfg).unwrap();
        let stages = summaries(&build);
        let gens = [r(1, 2)];
        let zero = MemberDecl::new(&gens, vec![0], None).unwrap();
        let rep = verify_member(&stages, &zero, &rat(1, 3)).unwrap();
        if let Rows::Member { stages, .. } = &rep.rows {
            assert!(stages.iter().all(|s| s.partial_sum_hi.is_zero()));
        }
        let half = MemberDecl::new(&gens, vec![1], None).unwrap();
        let rep = verify_member(&stages, &half, &rat(1, 1)).unwrap();
        assert!(rep.passed(), "{}", rep.verdict());
        let rep = verify_nonmember(&stages, &r(1, 3), &sixth(), &cfg.precision).unwrap();
        assert!(rep.passed(), "{}", rep.verdict());
        if let Rows::Nonmember { stages, .. } = &rep.rows {
            for s in stages {
                if let Some(n) = s.witness_n {
                    assert!(dist_to_int(&(int(n) * rat(1, 3))) >= sixth());
                }
            }
        }
    }

    #[test]
    fn transfer_examples() {
        assert!(transfer_holds(&[3, 6, 9], &[105, 108, 114, 126, 150], &rat(1, 7)));
        assert!(transfer_holds(&[3], &[3], &rat(1, 2)));
    }
}
