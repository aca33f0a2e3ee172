//! Thin sets replacing Bohr sets, the `ε_t` schedule, and the staged
//! construction of the sequence `A = S_1 ∪ S_2 ∪ ...`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::approx::{
    cross_gap, enumerate_group_ball, find_m, find_n, neighbourhood, plan_delta, DeltaConstraints, GroupBall, StagePlan,
};
use crate::bohr::{bohr_members_in, decompose_gap, enumerate_bohr, BohrSet, GapCover};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::rational::{dyadic_floor, int, log2_bounds, pow2, pow_bounds, rat, root_bounds, Rational};
use crate::torus::{norm_at_most, norm_enclosure, TorusPoint};

/// Working precision, in bits, of the certified power, root and log bounds.
const BOUND_BITS: u32 = 64;

/// Largest `N` used by the trial decomposition that estimates `C_1(t)`.
const TRIAL_LIMIT: u64 = 1 << 14;

/// `C_2 = C_1 + 16 C_1^2`.
pub fn c2_of(c1: u64) -> u64 {
    c1 + 16 * c1 * c1
}

/// Bounds on `2^r - 1` for rational `0 < r <= 1`.
fn two_pow_minus_one(r: &Rational) -> (Rational, Rational) {
    let (lo, hi) = pow_bounds(&int(2), r, BOUND_BITS);
    (lo - Rational::one(), hi - Rational::one())
}

/// `ε_t`: the largest power of two below
/// `min(1/(2ĉ_1), ((2^{1/t} - 1) 2^{-t} / Ĉ_2)^t)`, using a certified lower
/// bound for the second term.
pub fn epsilon_schedule(t: usize, c1_hat: u64) -> Result<Rational> {
    if t == 0 || c1_hat == 0 {
        return Err(Error::invalid("epsilon schedule needs t >= 1 and c1 >= 1"));
    }
    let c2 = int(c2_of(c1_hat));
    let (root_lo, _) = two_pow_minus_one(&rat(1, t as i64));
    let base = root_lo * pow2(-(t as i64)) / c2;
    let second = num_traits::pow(base, t);
    let first = Rational::new(BigInt::one(), BigInt::from(2 * c1_hat));
    Ok(dyadic_floor(if first < second { &first } else { &second }))
}

/// Certified upper bound on `C_2 ε^{1/t} / (2^{1/t} - 1)`.
pub fn term_upper(c1: u64, eps: &Rational, t: usize) -> Rational {
    let (_, root_hi) = root_bounds(eps, t as u32, BOUND_BITS);
    let (den_lo, _) = two_pow_minus_one(&rat(1, t as i64));
    int(c2_of(c1)) * root_hi / den_lo
}

/// Certified lower bound on `(ε^r / lg_2(8 c_1^2 N))^{1/r} = ε / lg_2(8 c_1^2 N)^{1/r}`.
pub fn anchor_threshold(eps: &Rational, r: &Rational, limit: u64, c1: u64) -> Rational {
    let arg = int(BigInt::from(8u32) * BigInt::from(c1) * BigInt::from(c1) * BigInt::from(limit));
    let (_, lg_hi) = log2_bounds(&arg, BOUND_BITS);
    let (_, denom_hi) = pow_bounds(&lg_hi, &r.recip(), BOUND_BITS);
    eps / denom_hi
}

/// Smallest `m > U` with `||m α_j|| <= threshold` certified for every `j`,
/// where the threshold is [`anchor_threshold`].
pub fn choose_anchor_m(
    alphas: &[TorusPoint],
    eps: &Rational,
    r: &Rational,
    limit: u64,
    u: u64,
    c1: u64,
    cfg: &Config,
) -> Result<u64> {
    check_exponent(r)?;
    if c1 == 0 || limit == 0 {
        return Err(Error::invalid("anchor search needs c1 >= 1 and N >= 1"));
    }
    let tau = anchor_threshold(eps, r, limit, c1);
    let mut window: u64 = 1024;
    let mut searched: u64 = 0;
    while searched < cfg.anchor_budget {
        let lo = u
            .checked_add(searched + 1)
            .ok_or_else(|| Error::budget("anchor search", cfg.anchor_budget))?;
        let hi = lo.saturating_add(window - 1);
        if let Some(&m) = bohr_members_in(alphas, &tau, lo, hi, cfg)?.first() {
            return Ok(m);
        }
        searched += window;
        window = window.saturating_mul(2);
    }
    Err(Error::budget(
        format!("anchor search above {u} with threshold {tau}"),
        cfg.anchor_budget,
    ))
}

fn check_exponent(r: &Rational) -> Result<()> {
    if !r.is_positive() || *r > Rational::one() {
        return Err(Error::invalid(format!("exponent must satisfy 0 < r <= 1, got {r}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ThinSet {
    /// Anchor `m`.
    pub m: u64,
    pub members: Vec<u64>,
    pub source_cover: GapCover,
    pub eps: Rational,
    pub r: Rational,
    /// Lower bound on `C_2 ε^r / (2^r - 1)`.
    pub bound_ii: Rational,
    /// Largest certified upper bound, over the generators, of `Σ_{n∈S} ||n α_j||^r`.
    pub sum_ii: Rational,
    pub anchor_threshold: Rational,
}

impl ThinSet {
    pub fn ii_holds(&self) -> bool {
        self.sum_ii <= self.bound_ii
    }
}

/// `{m + 2^l |n_i| : 2^l <= 8 K_i R}`, sorted and deduplicated.
pub fn thin_members(m: u64, cover: &GapCover) -> Result<Vec<u64>> {
    let r = cover.rank() as u128;
    let mut out = Vec::new();
    for g in &cover.generators {
        let cap = 8 * g.k as u128 * r;
        let mut p: u128 = 1;
        while p <= cap {
            let n = (m as u128)
                .checked_add(p * g.n.unsigned_abs() as u128)
                .filter(|&n| n <= u64::MAX as u128)
                .ok_or_else(|| Error::invalid("thin set element overflows u64"))?;
            out.push(n as u64);
            p *= 2;
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Certified upper bound on `Σ_{n∈S} ||n α||^r`.
pub fn power_sum_upper(members: &[u64], alpha: &TorusPoint, r: &Rational) -> Rational {
    members
        .iter()
        .map(|&n| {
            let hi = norm_enclosure(&BigInt::from(n), alpha, BOUND_BITS).hi;
            if hi.is_zero() {
                Rational::zero()
            } else {
                pow_bounds(&hi, r, BOUND_BITS).1
            }
        })
        .sum()
}

/// Lower bound on `C_2 ε^r / (2^r - 1)` with `C_2 = c1 + 16 c1^2`.
pub fn bound_ii_lower(c1: u64, eps: &Rational, r: &Rational) -> Rational {
    let (eps_r_lo, _) = pow_bounds(eps, r, BOUND_BITS);
    let (_, den_hi) = two_pow_minus_one(r);
    int(c2_of(c1)) * eps_r_lo / den_hi
}

/// Thin set for a covered Bohr set: anchor, members and the power-sum
/// certificate.
pub fn thin_set_from_cover(h: &BohrSet, cover: &GapCover, r: &Rational, u: u64, cfg: &Config) -> Result<ThinSet> {
    check_exponent(r)?;
    let c1 = cover.c1();
    let m = choose_anchor_m(h.alphas(), h.eps(), r, h.limit(), u, c1, cfg)?;
    let members = thin_members(m, cover)?;
    let sum_ii = h
        .alphas()
        .iter()
        .map(|a| power_sum_upper(&members, a, r))
        .max()
        .unwrap_or_default();
    Ok(ThinSet {
        m,
        members,
        source_cover: cover.clone(),
        eps: h.eps().clone(),
        r: r.clone(),
        bound_ii: bound_ii_lower(c1, h.eps(), r),
        sum_ii,
        anchor_threshold: anchor_threshold(h.eps(), r, h.limit(), c1),
    })
}

/// Covers `H_{N,ε}` and builds the thin set above `U`.
pub fn build_thin_set(
    alphas: &[TorusPoint],
    eps: &Rational,
    r: &Rational,
    limit: u64,
    u: u64,
    cfg: &Config,
) -> Result<ThinSet> {
    let h = enumerate_bohr(alphas, eps, limit, cfg)?;
    let cover = decompose_gap(&h, cfg)?;
    thin_set_from_cover(&h, &cover, r, u, cfg)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificates {
    /// `Σ_{n∈S_t} ||n α_j||^{1/t} <= C_2 ε_t^{1/t} / (2^{1/t} - 1)` for every
    /// generator, with `C_2 = c1 + 16 c1^2`.
    pub ii: bool,
    /// `max S_{t-1} < min S_t`.
    pub ordering: bool,
    /// The solution set at `N_t` lies inside `V_t`.
    pub n_contained: bool,
    /// `2 δ_t < min gap` and the cross condition with the previous stage.
    pub delta: bool,
    /// `ε_t < 1/c1`.
    pub eps_small: bool,
    /// `term_t <= 2^{-t}`.
    pub term: bool,
    /// The cover passed the containment check.
    pub cover: bool,
}

impl Certificates {
    pub fn all(&self) -> bool {
        self.ii && self.ordering && self.n_contained && self.delta && self.eps_small && self.term && self.cover
    }
}

#[derive(Clone, Debug)]
pub struct StageArtifacts {
    pub plan: StagePlan,
    pub alphas: Vec<TorusPoint>,
    pub bohr: BohrSet,
    pub cover: GapCover,
    pub thin: ThinSet,
    pub c1: u64,
    pub c2: u64,
    /// Certified upper bound on `C_2 ε_t^{1/t} / (2^{1/t} - 1)`.
    pub term: Rational,
    /// Estimate of `C_1(t)` used for the schedule.
    pub c1_estimate: u64,
    /// Whether `δ_t` was constrained by a lookahead ball.
    pub lookahead: bool,
    pub rebuilt: bool,
    pub certificates: Certificates,
}

impl StageArtifacts {
    pub fn t(&self) -> usize {
        self.plan.t
    }

    pub fn members(&self) -> &[u64] {
        &self.thin.members
    }
}

/// A stage's ε, M and ball, computed either in place or as the lookahead of
/// the previous stage.
#[derive(Clone, Debug)]
struct Prepared {
    t: usize,
    c1_hat: u64,
    eps: Rational,
    ball: GroupBall,
}

/// The preparation of stage `t` attempted early, kept so a failure is not
/// repeated.
#[derive(Debug)]
struct Lookahead {
    t: usize,
    c1_hat: u64,
    result: Result<Prepared>,
}

/// Incremental builder of the stages of the sequence.
pub struct Builder {
    generators: Vec<TorusPoint>,
    cfg: Config,
    stages: Vec<StageArtifacts>,
    balls: Vec<GroupBall>,
    lookahead: Option<Lookahead>,
    limit: usize,
}

impl Builder {
    /// Builder producing at most `stages` stages.
    pub fn new(generators: Vec<TorusPoint>, stages: usize, cfg: Config) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::invalid("the group needs at least one generator"));
        }
        if stages == 0 {
            return Err(Error::invalid("at least one stage is required"));
        }
        Ok(Builder {
            generators,
            cfg,
            stages: Vec::new(),
            balls: Vec::new(),
            lookahead: None,
            limit: stages,
        })
    }

    pub fn stages(&self) -> &[StageArtifacts] {
        &self.stages
    }

    pub fn into_stages(self) -> Vec<StageArtifacts> {
        self.stages
    }

    pub fn generators(&self) -> &[TorusPoint] {
        &self.generators
    }

    fn prefix(&self, t: usize) -> Vec<TorusPoint> {
        self.generators[..t.min(self.generators.len())].to_vec()
    }

    /// `C_1(t)` guess from covers of small Bohr sets, iterated until stable.
    fn estimate_c1(&self, t: usize) -> Result<u64> {
        let alphas = self.prefix(t);
        let mut c = 1;
        for _ in 0..3 {
            let eps = epsilon_schedule(t, c)?;
            let n = (int(16) / &eps)
                .ceil()
                .to_integer()
                .to_u64()
                .unwrap_or(u64::MAX)
                .clamp(64, TRIAL_LIMIT);
            let h = enumerate_bohr(&alphas, &eps, n, &self.cfg)?;
            if h.is_empty() {
                break;
            }
            let trial = decompose_gap(&h, &self.cfg)?.c1();
            if trial <= c {
                break;
            }
            c = trial;
        }
        Ok(c)
    }

    fn prepare(&self, t: usize, c1_hat: u64) -> Result<Prepared> {
        let alphas = self.prefix(t);
        let eps = epsilon_schedule(t, c1_hat)?;
        let mut m = find_m(&alphas, &eps, &self.cfg)?;
        if let Some(prev) = self.balls.last() {
            m = m.max(prev.m());
        }
        let ball = enumerate_group_ball(&alphas, m, &self.cfg)?;
        Ok(Prepared { t, c1_hat, eps, ball })
    }

    /// Builds the next stage. On error the stages built so far are kept.
    pub fn next_stage(&mut self) -> Result<&StageArtifacts> {
        let t = self.stages.len() + 1;
        if t > self.limit {
            return Err(Error::invalid(format!("only {} stages were requested", self.limit)));
        }
        let stage = self.build(t).map_err(|e| e.at_stage(t))?;
        self.stages.push(stage);
        Ok(self.stages.last().expect("just pushed"))
    }

    fn build(&mut self, t: usize) -> Result<StageArtifacts> {
        let estimate = self.estimate_c1(t)?;
        let first = match self.lookahead.take() {
            Some(l) if l.t == t && l.c1_hat == estimate => l.result?,
            _ => self.prepare(t, estimate)?,
        };
        let stage = self.assemble(first, false)?;
        if stage.c1 <= stage.c1_estimate {
            return Ok(stage);
        }
        let retry = self.prepare(t, stage.c1)?;
        let stage = self.assemble(retry, true)?;
        if stage.c1 > stage.c1_estimate {
            return Err(Error::Certificate(format!(
                "realized C1 = {} still exceeds the estimate {} after a rebuild",
                stage.c1, stage.c1_estimate
            )));
        }
        Ok(stage)
    }

    fn assemble(&mut self, prep: Prepared, rebuilt: bool) -> Result<StageArtifacts> {
        let cfg = self.cfg.clone();
        let prec = &cfg.precision;
        let t = prep.t;
        let alphas = self.prefix(t);
        let prev_delta = self.stages.last().map(|p| p.plan.delta.clone());
        let u = self
            .stages
            .last()
            .and_then(|p| p.members().last().copied())
            .unwrap_or(0);

        let mut constraints = DeltaConstraints::default();
        if let (Some(d), Some(prev_ball)) = (prev_delta, self.balls.last()) {
            constraints.prev_delta = Some(d);
            constraints.back_cross = cross_gap(prev_ball, &prep.ball, prec)?;
        }
        let mut lookahead = None;
        let mut forward = false;
        if t < self.limit {
            let next_estimate = match self.estimate_c1(t + 1) {
                Ok(c) => Some(c),
                Err(Error::BudgetExceeded { .. }) => None,
                Err(e) => return Err(e),
            };
            if let Some(c) = next_estimate {
                let saved = std::mem::replace(&mut self.balls, vec![prep.ball.clone()]);
                let result = self.prepare(t + 1, c);
                self.balls = saved;
                let result = match result {
                    Ok(next) => {
                        constraints.forward_cross = cross_gap(&prep.ball, &next.ball, prec)?;
                        forward = true;
                        Ok(next)
                    }
                    // the next stage is out of reach; this one is built as the last
                    Err(e @ Error::BudgetExceeded { .. }) => Err(e),
                    Err(e) => return Err(e),
                };
                lookahead = Some(Lookahead {
                    t: t + 1,
                    c1_hat: c,
                    result,
                });
            }
        }
        let delta = plan_delta(&prep.ball, &constraints, prec)?;
        let v = neighbourhood(&prep.ball, &delta);
        let n = find_n(&alphas, &prep.eps, &v, &cfg)?;
        let h = enumerate_bohr(&alphas, &prep.eps, n, &cfg)?;
        let cover = decompose_gap(&h, &cfg)?;
        let c1 = cover.c1();
        let r = rat(1, t as i64);
        let thin = thin_set_from_cover(&h, &cover, &r, u, &cfg)?;
        let term = term_upper(c1, &prep.eps, t);

        let delta_ok = {
            let gap_ok = if prep.ball.len() >= 2 {
                int(2) * &delta < crate::approx::min_gap(&prep.ball, prec)?
            } else {
                true
            };
            let back_ok = match (&constraints.prev_delta, &constraints.back_cross) {
                (Some(d), Some(c)) => d + &delta < *c,
                _ => true,
            };
            gap_ok && back_ok
        };
        let certificates = Certificates {
            ii: thin.ii_holds(),
            ordering: thin.members.first().is_some_and(|&m| m > u),
            n_contained: crate::approx::certify_n(&alphas, &prep.eps, &v, n, &cfg)?,
            delta: delta_ok,
            eps_small: prep.eps < Rational::new(BigInt::one(), BigInt::from(c1)),
            term: term <= pow2(-(t as i64)),
            cover: cover.containment_verified,
        };
        let stage = StageArtifacts {
            plan: StagePlan {
                t,
                m: prep.ball.m(),
                delta,
                v,
                eps: prep.eps.clone(),
                n,
            },
            alphas,
            bohr: h,
            cover,
            thin,
            c1,
            c2: c2_of(c1),
            term,
            c1_estimate: prep.c1_hat,
            lookahead: forward,
            rebuilt,
            certificates,
        };
        if stage.c1 <= stage.c1_estimate {
            self.balls.push(prep.ball);
            self.lookahead = lookahead;
        }
        Ok(stage)
    }
}

/// Result of building up to `T` stages: the stages that were completed and
/// the error that stopped the stream, if any.
#[derive(Debug)]
pub struct SequenceBuild {
    pub generators: Vec<TorusPoint>,
    pub stages: Vec<StageArtifacts>,
    pub error: Option<Error>,
}

impl SequenceBuild {
    /// Elements of `A` in increasing order, tagged with their stage.
    pub fn sequence(&self) -> Vec<(usize, u64)> {
        self.stages
            .iter()
            .flat_map(|s| s.members().iter().map(move |&n| (s.t(), n)))
            .collect()
    }

    /// Whether the concatenated members are strictly increasing.
    pub fn strictly_increasing(&self) -> bool {
        self.sequence().windows(2).all(|w| w[0].1 < w[1].1)
    }
}

/// Builds stages `1..=T` in order, stopping at the first failure.
pub fn stream_sequence(generators: Vec<TorusPoint>, stages: usize, cfg: &Config) -> Result<SequenceBuild> {
    let mut builder = Builder::new(generators.clone(), stages, cfg.clone())?;
    let mut error = None;
    for _ in 0..stages {
        if let Err(e) = builder.next_stage() {
            error = Some(e);
            break;
        }
    }
    Ok(SequenceBuild {
        generators,
        stages: builder.into_stages(),
        error,
    })
}

/// Whether `||m α_j|| <= threshold` holds for every generator.
pub fn anchor_valid(alphas: &[TorusPoint], m: u64, threshold: &Rational, cfg: &Config) -> Result<bool> {
    for a in alphas {
        if !norm_at_most(&BigInt::from(m), a, threshold, &cfg.precision)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohr::Generator;
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

    #[test]
    fn schedule_examples() {
        assert_eq!(epsilon_schedule(1, 1).unwrap(), rat(1, 64));
        assert_eq!(epsilon_schedule(2, 2).unwrap(), pow2(-19));
        for t in 1..=6 {
            let eps = epsilon_schedule(t, 1).unwrap();
            assert!(term_upper(1, &eps, t) <= pow2(-(t as i64)), "t = {t}");
        }
    }

    #[test]
    fn anchor_examples() {
        let cfg = Config::default();
        let m = choose_anchor_m(&[r(1, 3)], &rat(1, 10), &rat(1, 1), 10, 100, 1, &cfg).unwrap();
        assert_eq!(m, 102);
        let tau = anchor_threshold(&rat(1, 10), &rat(1, 1), 10, 1);
        // ε / lg2(80) = 0.01582
        assert!(tau > rat(1581, 100_000) && tau < rat(1583, 100_000));
        assert_eq!(
            choose_anchor_m(&[r(0, 1)], &rat(1, 10), &rat(1, 2), 7, 41, 3, &cfg).unwrap(),
            42
        );
        let m = choose_anchor_m(&[sqrt2()], &rat(1, 10), &rat(1, 2), 100, 0, 2, &cfg).unwrap();
        let tau = anchor_threshold(&rat(1, 10), &rat(1, 2), 100, 2);
        assert!(anchor_valid(&[sqrt2()], m, &tau, &cfg).unwrap());
        for k in 1..m {
            assert!(!anchor_valid(&[sqrt2()], k, &tau, &cfg).unwrap());
        }
    }

    #[test]
    fn thin_set_examples() {
        let cfg = Config::default();
        let s = build_thin_set(&[r(1, 3)], &rat(1, 10), &rat(1, 1), 10, 100, &cfg).unwrap();
        assert_eq!(s.source_cover.generators, vec![Generator { n: 3, k: 3 }]);
        assert_eq!(s.m, 102);
        assert_eq!(s.members, vec![105, 108, 114, 126, 150]);
        assert!(s.ii_holds());
        let s = build_thin_set(&[r(1, 3)], &rat(1, 10), &rat(1, 1), 10, 200, &cfg).unwrap();
        assert_eq!(s.m, 201);
        assert_eq!(s.members, vec![204, 207, 213, 225, 249]);
        let single = GapCover {
            generators: vec![Generator { n: 10, k: 1 }],
            achieved_a: rat(0, 1),
            achieved_b: rat(1, 1),
            containment_verified: true,
        };
        assert_eq!(thin_members(0, &single).unwrap(), vec![10, 20, 40, 80]);
    }

    #[test]
    fn half_group_three_stages() {
        let cfg = Config::default();
        let build = stream_sequence(vec![r(1, 2)], 3, &cfg).unwrap();
        assert!(build.error.is_none(), "{:?}", build.error);
        assert_eq!(build.stages.len(), 3);
        assert!(build.strictly_increasing());
        for s in &build.stages {
            assert!(s.certificates.all(), "stage {}: {:?}", s.t(), s.certificates);
        }
        assert_eq!(build.stages[0].plan.delta, rat(1, 8));
    }

    #[test]
    fn sixths_group_two_stages() {
        let cfg = Config::default();
        let build = stream_sequence(vec![r(1, 2), r(1, 3)], 2, &cfg).unwrap();
        assert!(build.error.is_none(), "{:?}", build.error);
        let s2 = &build.stages[1];
        assert_eq!(s2.plan.m, 1);
        for k in 0..6 {
            assert!(s2.plan.v.contains_rational(&rat(k, 6)));
        }
    }

    #[test]
    fn zero_generator_stage() {
        let cfg = Config::default();
        let build = stream_sequence(vec![r(0, 1)], 1, &cfg).unwrap();
        assert!(build.error.is_none(), "{:?}", build.error);
        let s = &build.stages[0];
        assert_eq!(s.bohr.members(), (1..=s.plan.n).collect::<Vec<_>>().as_slice());
        assert!(s.certificates.all());
    }
}
