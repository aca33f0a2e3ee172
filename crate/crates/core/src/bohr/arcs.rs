//! Finite unions of closed circle arcs with rational endpoints.
//!
//! A set is stored as its preimage in `[0, 1]`: sorted, pairwise disjoint,
//! non-touching closed intervals. Because `0` and `1` name the same point,
//! an interval starting at `0` is always accompanied by one ending at `1`
//! (possibly the single point `[1, 1]`) and vice versa. With that rule plain
//! interval algebra on `[0, 1]` is exact set algebra on the circle.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{frac, int, Rational};
use crate::torus::{Precision, TorusPoint};

/// One arc of an [`ArcSet`] as seen on the circle. A wrapping arc covers
/// `[start, 1) ∪ [0, end]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub start: Rational,
    pub end: Rational,
    pub wraps: bool,
}

impl Arc {
    pub fn length(&self) -> Rational {
        if self.wraps {
            Rational::one() - &self.start + &self.end
        } else {
            &self.end - &self.start
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Inside,
    Outside,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ArcSet {
    pieces: Vec<(Rational, Rational)>,
}

impl ArcSet {
    pub fn empty() -> Self {
        ArcSet { pieces: Vec::new() }
    }

    pub fn full() -> Self {
        ArcSet {
            pieces: vec![(Rational::zero(), Rational::one())],
        }
    }

    /// Canonical set from arbitrary closed intervals of `[0, 1]`.
    pub fn from_pieces(mut pieces: Vec<(Rational, Rational)>) -> Self {
        pieces.retain(|(a, b)| a <= b);
        pieces.sort();
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match out.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        let zero = Rational::zero();
        let one = Rational::one();
        let at_zero = out.first().is_some_and(|p| p.0 == zero);
        let at_one = out.last().is_some_and(|p| p.1 == one);
        if at_zero && !at_one {
            out.push((one.clone(), one));
        } else if at_one && !at_zero {
            out.insert(0, (zero.clone(), zero));
        }
        ArcSet { pieces: out }
    }

    /// Closed arc of the given radius around a rational center.
    pub fn around(center: &Rational, radius: &Rational) -> Self {
        Self::from_arcs_around(std::iter::once(center.clone()), radius)
    }

    /// Union of closed arcs of the given radius around each center.
    pub fn from_arcs_around(centers: impl IntoIterator<Item = Rational>, radius: &Rational) -> Self {
        if *radius >= Rational::new(1.into(), 2.into()) {
            return Self::full();
        }
        let mut pieces = Vec::new();
        for c in centers {
            let c = frac(&c);
            push_wrapped(&mut pieces, &c - radius, &c + radius);
        }
        Self::from_pieces(pieces)
    }

    /// Intervals of the `[0, 1]` preimage.
    pub fn pieces(&self) -> &[(Rational, Rational)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.pieces.len() == 1 && self.pieces[0].0.is_zero() && self.pieces[0].1.is_one()
    }

    /// Arcs on the circle, with the two seam pieces joined into a wrapping arc.
    pub fn arcs(&self) -> Vec<Arc> {
        if self.is_full() {
            return vec![Arc {
                start: Rational::zero(),
                end: Rational::one(),
                wraps: false,
            }];
        }
        let mut pieces: &[(Rational, Rational)] = &self.pieces;
        let mut wrap = None;
        if pieces.len() >= 2 && pieces[0].0.is_zero() && pieces[pieces.len() - 1].1.is_one() {
            let first = &pieces[0];
            let last = &pieces[pieces.len() - 1];
            wrap = Some(Arc {
                start: if last.0.is_one() {
                    Rational::zero()
                } else {
                    last.0.clone()
                },
                end: first.1.clone(),
                wraps: !last.0.is_one(),
            });
            pieces = &pieces[1..pieces.len() - 1];
        }
        let mut out: Vec<Arc> = pieces
            .iter()
            .map(|(a, b)| Arc {
                start: a.clone(),
                end: b.clone(),
                wraps: false,
            })
            .collect();
        if let Some(w) = wrap {
            if w.wraps {
                out.push(w);
            } else {
                out.insert(0, w);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.arcs().len()
    }

    pub fn total_length(&self) -> Rational {
        self.pieces.iter().map(|(a, b)| b - a).sum()
    }

    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a0, a1) = &self.pieces[i];
            let (b0, b1) = &other.pieces[j];
            let lo = if a0 > b0 { a0 } else { b0 };
            let hi = if a1 < b1 { a1 } else { b1 };
            if lo <= hi {
                out.push((lo.clone(), hi.clone()));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcSet::from_pieces(out)
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        ArcSet::from_pieces(pieces)
    }

    /// Whether `inner` is a subset of `self`.
    pub fn contains(&self, inner: &ArcSet) -> bool {
        inner.pieces.iter().all(|p| self.covers_piece(p))
    }

    /// Whether the closed interval `[a, b]` of `[0, 1]` lies inside one piece.
    pub fn covers_piece(&self, (a, b): &(Rational, Rational)) -> bool {
        let idx = self.pieces.partition_point(|(lo, _)| lo <= a);
        idx > 0 && self.pieces[idx - 1].1 >= *b
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        let x = frac(x);
        self.covers_piece(&(x.clone(), x))
    }

    /// Membership of a torus point, refining irrational enclosures until the
    /// point is separated from every endpoint or the cap is reached.
    pub fn member(&self, beta: &TorusPoint, prec: &Precision) -> Membership {
        if let Some(x) = beta.as_rational() {
            return if self.contains_rational(x) {
                Membership::Inside
            } else {
                Membership::Outside
            };
        }
        for k in prec.levels(32) {
            let e = beta.enclosure(k);
            if e.lo <= Rational::zero() || e.hi >= Rational::one() {
                continue;
            }
            if self.covers_piece(&(e.lo.clone(), e.hi.clone())) {
                return Membership::Inside;
            }
            if self.intersect(&ArcSet::from_pieces(vec![(e.lo, e.hi)])).is_empty() {
                return Membership::Outside;
            }
        }
        Membership::Undecided
    }

    /// Keeps the pieces for which `keep` holds and re-canonicalizes.
    pub fn retain_pieces(&self, mut keep: impl FnMut(&(Rational, Rational)) -> bool) -> ArcSet {
        ArcSet::from_pieces(self.pieces.iter().filter(|p| keep(p)).cloned().collect())
    }

    /// `self ∩ {β : ||nβ|| <= c}`, generating only the constraint arcs that
    /// meet `self`. Fails once more than `budget` pieces would be produced.
    pub fn intersect_constraint(&self, n: u64, c: &Rational, budget: u64) -> Result<ArcSet> {
        Ok(ArcSet::from_pieces(constraint_pieces(&self.pieces, n, c, budget)?))
    }
}

/// Raw pieces of `(⋃ pieces) ∩ {β : ||nβ|| <= c}` in `[0, 1]`, without the
/// seam rule. Callers that only test emptiness or containment can work on
/// these directly.
pub fn constraint_pieces(
    pieces: &[(Rational, Rational)],
    n: u64,
    c: &Rational,
    budget: u64,
) -> Result<Vec<(Rational, Rational)>> {
    if n == 0 {
        return Ok(pieces.to_vec());
    }
    let n_big = BigInt::from(n);
    let n_rat = int(n);
    let r = c / &n_rat;
    let mut out = Vec::new();
    let mut produced: u64 = 0;
    for (a, b) in pieces {
        // k/n - r <= b and k/n + r >= a
        let k_lo = (a * &n_rat - c).ceil().to_integer();
        let k_hi = (b * &n_rat + c).floor().to_integer();
        let mut k = k_lo;
        while k <= k_hi {
            produced += 1;
            if produced > budget {
                return Err(Error::budget("arc pieces for one constraint", budget));
            }
            let center = Rational::new(k.clone(), n_big.clone());
            let lo = &center - &r;
            let hi = &center + &r;
            let lo = if lo > *a { lo } else { a.clone() };
            let hi = if hi < *b { hi } else { b.clone() };
            if lo <= hi {
                out.push((lo, hi));
            }
            k += 1;
        }
    }
    Ok(out)
}

fn push_wrapped(pieces: &mut Vec<(Rational, Rational)>, lo: Rational, hi: Rational) {
    let zero = Rational::zero();
    let one = Rational::one();
    if lo < zero {
        pieces.push((zero.clone(), hi.clone()));
        pieces.push((lo + &one, one));
    } else if hi > one {
        pieces.push((lo, one.clone()));
        pieces.push((zero, hi - one));
    } else {
        pieces.push((lo, hi));
    }
}

/// `{β : ||nβ|| <= c}`: arcs of radius `c/n` around the points `k/n`.
pub fn arcs_for_constraint(n: u64, c: &Rational) -> Result<ArcSet> {
    if n == 0 {
        return Err(Error::invalid("constraint needs n >= 1"));
    }
    check_cutoff(c)?;
    ArcSet::full().intersect_constraint(n, c, u64::MAX)
}

/// `⋂_{n ∈ h} {β : ||nβ|| <= c}`. Constraints are applied in increasing
/// order of `n` so that later, denser constraints meet a small set.
pub fn solve_small_norm_set(h: &[u64], c: &Rational, budget: u64) -> Result<ArcSet> {
    if h.is_empty() {
        return Err(Error::invalid("constraint list is empty"));
    }
    check_cutoff(c)?;
    let mut ns: Vec<u64> = h.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut set = ArcSet::full();
    for n in ns {
        set = set.intersect_constraint(n, c, budget)?;
        if set.is_empty() {
            break;
        }
    }
    Ok(set)
}

fn check_cutoff(c: &Rational) -> Result<()> {
    if *c <= Rational::zero() || *c >= Rational::new(1.into(), 2.into()) {
        return Err(Error::invalid(format!("cutoff must satisfy 0 < c < 1/2, got {c}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn sixth() -> Rational {
        rat(1, 6)
    }

    #[test]
    fn single_constraint_wraps() {
        let s = arcs_for_constraint(1, &sixth()).unwrap();
        assert_eq!(
            s.arcs(),
            vec![Arc {
                start: rat(5, 6),
                end: rat(1, 6),
                wraps: true
            }]
        );
        assert_eq!(s.total_length(), rat(1, 3));
    }

    #[test]
    fn double_constraint() {
        let s = arcs_for_constraint(2, &sixth()).unwrap();
        assert_eq!(
            s.pieces(),
            &[
                (rat(0, 1), rat(1, 12)),
                (rat(5, 12), rat(7, 12)),
                (rat(11, 12), rat(1, 1))
            ]
        );
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn nearly_full_constraint_stays_disjoint() {
        let s = arcs_for_constraint(3, &(rat(1, 2) - rat(1, 1000))).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.total_length() < rat(1, 1));
        assert!(arcs_for_constraint(3, &rat(1, 2)).is_err());
    }

    #[test]
    fn intersections_and_membership() {
        let a = arcs_for_constraint(1, &sixth()).unwrap();
        let b = arcs_for_constraint(2, &sixth()).unwrap();
        let x = a.intersect(&b);
        assert_eq!(x, ArcSet::around(&rat(0, 1), &rat(1, 12)));
        assert_eq!(solve_small_norm_set(&[1, 2], &sixth(), 1000).unwrap(), x);
        assert_eq!(solve_small_norm_set(&[1], &sixth(), 1000).unwrap(), a);
        assert!(ArcSet::full().contains(&x) && ArcSet::full().contains(&ArcSet::empty()));
        let p = Precision::default();
        assert_eq!(x.member(&TorusPoint::rational(rat(1, 10)), &p), Membership::Outside);
        assert_eq!(x.member(&TorusPoint::rational(rat(1, 12)), &p), Membership::Inside);
        assert_eq!(x.member(&TorusPoint::rational(rat(-1, 12)), &p), Membership::Inside);
    }

    #[test]
    fn even_multiples() {
        let s = solve_small_norm_set(&[2, 4, 6], &sixth(), 1000).unwrap();
        let expect = ArcSet::from_arcs_around([rat(0, 1), rat(1, 2)], &rat(1, 36));
        assert_eq!(s, expect);
    }

    #[test]
    fn seam_point_is_kept() {
        let s = ArcSet::from_pieces(vec![(rat(0, 1), rat(0, 1))]);
        assert!(s.contains_rational(&rat(1, 1)));
        assert_eq!(s.pieces().len(), 2);
        assert_eq!(s.len(), 1);
    }
}
