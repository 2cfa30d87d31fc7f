//! Preassignment to `r` sampled players followed by completion with victims.
//!
//! The preassigning part draws `ceil(t r / eps)` players uniformly with
//! replacement, keeps the `r` whose `128 r / n`-cuts of the cake are
//! leftmost, and divides `[0, x]` among them, where `x` is the largest of
//! those cuts. Every selected player values `[0, x]` at least `128 r / n`, so
//! a 128-fair division of it is fair. The completion part removes the
//! `floor(eps n)` players who value `[x, 1]` least and divides `[x, 1]`
//! proportionally among the rest.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, RngCore};

use crate::cake::{Interval, PieceSet};
use crate::error::{Error, Result};
use crate::oracle::{Oracle, QueryLedger};
use crate::protocols::{
    approx_fair, dc, fair_threshold, is_safe_set, pcut, victimize, Allocation, ApproxFairOutcome,
    ApproxFairStrategy, FairnessCertificate,
};
use crate::rational::{ceil_to_u64, floor_to_u64, format_rational, int, rat, to_f64, Rational};
use crate::valuation::{Instance, PlayerId};

pub const PREASSIGN_PHASE: &str = "preassign";
pub const COMPLETION_PHASE: &str = "completion";

/// Approximation factor handed to the approximate-fair subroutine.
pub const APPROX_FACTOR: i64 = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndesignatedParams {
    n: usize,
    r: usize,
    eps: Rational,
    t: Rational,
    alpha_star: Rational,
    draws: u64,
    retries: u64,
}

impl UndesignatedParams {
    /// Requires `r >= 1`, `0 < eps <= 1`, `t > 3/2`, `127 r <= eps n`, and
    /// `128 r <= n` so that the selection cut is answerable.
    pub fn new(n: usize, r: usize, eps: Rational, t: Rational) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if r == 0 {
            return bad("r must be at least 1".into());
        }
        if eps <= Rational::zero() || eps > Rational::one() {
            return bad(format!("eps = {} must lie in (0, 1]", format_rational(&eps)));
        }
        if t <= rat(3, 2) {
            return bad(format!("t = {} must exceed 3/2", format_rational(&t)));
        }
        let n_r = int(n as i64);
        if int(127 * r as i64) > &eps * &n_r {
            return bad(format!(
                "r = {r} exceeds eps n / 127 = {}",
                format_rational(&(&eps * &n_r / int(127)))
            ));
        }
        if 128 * r > n {
            return bad(format!(
                "selection threshold 128 r / n = {}/{n} exceeds 1",
                128 * r
            ));
        }
        let r_r = int(r as i64);
        let alpha_star = int(APPROX_FACTOR) * &r_r / &n_r;
        let draws = ceil_to_u64(&(&t * &r_r / &eps));
        let retries = ceil_to_u64(&(&t / &eps));
        Ok(UndesignatedParams {
            n,
            r,
            eps,
            t,
            alpha_star,
            draws,
            retries,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    /// `128 r / n`.
    pub fn alpha_star(&self) -> &Rational {
        &self.alpha_star
    }

    /// `ceil(t r / eps)`.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// `ceil(t / eps)`.
    pub fn retries(&self) -> u64 {
        self.retries
    }

    /// `floor(eps n)`.
    pub fn victims(&self) -> usize {
        floor_to_u64(&(&self.eps * int(self.n as i64))) as usize
    }
}

/// `1 - 8/((2t - 3)^2 r)`: the sampling part of the success floor, exact.
pub fn sampling_success_floor(t: &Rational, r: usize) -> Rational {
    let gap = int(2) * t - int(3);
    Rational::one() - int(8) / (&gap * &gap * int(r as i64))
}

/// `1 - 8/((2t - 3)^2 r) - q^(t/eps)` where `q` is the per-attempt failure
/// probability of the approximate-fair strategy (`1/64` for the linear-time
/// construction, `0` for the exact adapter), clamped at 0.
pub fn success_floor(t: &Rational, r: usize, eps: &Rational, attempt_failure: f64) -> f64 {
    let sampling = to_f64(&sampling_success_floor(t, r));
    let exponent = to_f64(&(t / eps));
    let retry_term = if attempt_failure == 0.0 {
        0.0
    } else {
        attempt_failure.powf(exponent)
    };
    (sampling - retry_term).max(0.0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UndesignatedOptions {
    /// Charge one cut query per draw, including repeated draws of the same
    /// player, instead of one per distinct sampled player.
    pub charge_duplicates: bool,
    /// Compute ground-truth premises of the correctness argument.
    pub verify_premises: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preassigned {
    /// Distinct sampled players, ascending.
    pub sample: Vec<PlayerId>,
    /// Selected players, leftmost cut first.
    pub selected: Vec<PlayerId>,
    pub cut_point: Rational,
    pub allocation: Allocation,
    pub attempts: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PreassignResult {
    Assigned(Preassigned),
    /// Fewer than `r` distinct players were drawn.
    FailedSampling { distinct: usize },
    /// Every approximate-fair attempt failed.
    FailedApproxFair { sample: Vec<PlayerId>, selected: Vec<PlayerId>, attempts: u64 },
}

/// Draws `count` players uniformly with replacement.
pub fn draw_players<R: Rng + ?Sized>(rng: &mut R, n: usize, count: u64) -> Vec<PlayerId> {
    (0..count).map(|_| rng.random_range(0..n)).collect()
}

/// The preassigning part.
pub fn preassign_u(
    oracle: &mut Oracle<'_>,
    params: &UndesignatedParams,
    strategy: &dyn ApproxFairStrategy,
    options: UndesignatedOptions,
    rng: &mut dyn RngCore,
) -> Result<PreassignResult> {
    let draws = draw_players(rng, params.n, params.draws);
    let sample: Vec<PlayerId> = draws.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if sample.len() < params.r {
        return Ok(PreassignResult::FailedSampling {
            distinct: sample.len(),
        });
    }
    let cake = Interval::unit();
    let chosen = pcut(oracle, &sample, &cake, &params.alpha_star, params.r)?;
    if options.charge_duplicates {
        let mut seen = BTreeSet::new();
        for &p in &draws {
            if !seen.insert(p) {
                oracle.cut(&cake, p, &params.alpha_star)?;
            }
        }
    }
    if chosen.shortfall {
        return Ok(PreassignResult::FailedSampling {
            distinct: chosen.selected.len(),
        });
    }
    let cut_point = chosen
        .max_selected_point()
        .expect("r >= 1 selected players have cut points");
    let piece: PieceSet = Interval::new(Rational::zero(), cut_point.clone())?.into();
    let c = int(APPROX_FACTOR);
    let max_attempts = if strategy.is_randomized() {
        params.retries
    } else {
        1
    };
    for attempt in 1..=max_attempts {
        if let ApproxFairOutcome::Success(allocation) =
            approx_fair(strategy, oracle, &chosen.selected, &piece, &c, rng)?
        {
            return Ok(PreassignResult::Assigned(Preassigned {
                sample,
                selected: chosen.selected,
                cut_point,
                allocation,
                attempts: attempt,
            }));
        }
    }
    Ok(PreassignResult::FailedApproxFair {
        sample,
        selected: chosen.selected,
        attempts: max_attempts,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    pub victims: Vec<PlayerId>,
    pub survivors: Vec<PlayerId>,
    pub allocation: Allocation,
    /// The pool was smaller than `floor(eps n)` and was removed entirely.
    pub degenerate: bool,
}

/// The completion part: victimize `floor(eps n)` of `pool`, then divide
/// `remainder` proportionally among the rest.
pub fn completion(
    oracle: &mut Oracle<'_>,
    pool: &[PlayerId],
    remainder: &PieceSet,
    eps: &Rational,
) -> Result<Completion> {
    let wanted = floor_to_u64(&(eps * int(oracle.n() as i64))) as usize;
    let degenerate = pool.len() < wanted;
    let m = wanted.min(pool.len());
    let cut = victimize(oracle, pool, remainder, m)?;
    let allocation = dc(oracle, &cut.survivors, remainder)?;
    Ok(Completion {
        victims: cut.victims,
        survivors: cut.survivors,
        allocation,
        degenerate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndesignatedStatus {
    Success,
    FailedSampling,
    FailedApproxFair,
}

#[derive(Clone, Debug)]
pub struct UndesignatedOutcome {
    pub status: UndesignatedStatus,
    pub sample_size: usize,
    pub selected: Vec<PlayerId>,
    pub cut_point: Option<Rational>,
    pub preassigned: Allocation,
    pub remainder: PieceSet,
    pub victims: Vec<PlayerId>,
    pub completion: Allocation,
    pub preassigned_certificate: FairnessCertificate,
    pub survivor_certificate: FairnessCertificate,
    pub approx_fair_attempts: u64,
    pub degenerate_completion: bool,
    pub ledger: QueryLedger,
    /// Ground truth: survivors are safe with respect to the remainder.
    pub survivors_safe: Option<bool>,
    /// Ground truth: at least `r` sampled players are among the
    /// `floor(eps n)` players with leftmost `128 r / n`-cuts.
    pub sampling_premise: Option<bool>,
    expected_victims: usize,
}

impl UndesignatedOutcome {
    pub fn expected_victims(&self) -> usize {
        self.expected_victims
    }

    /// Every preassigned player and every survivor is fair, and exactly
    /// `floor(eps n)` players were victimized.
    pub fn is_success(&self) -> bool {
        self.status == UndesignatedStatus::Success
            && self.preassigned_certificate.all_fair()
            && self.survivor_certificate.all_fair()
            && self.victims.len() == self.expected_victims
    }

    pub fn all_disjoint(&self) -> bool {
        let mut all = self.preassigned.clone();
        all.extend(self.completion.clone());
        all.is_pairwise_disjoint()
    }
}

/// Both parts end to end, with ground-truth certification.
pub fn run_theorem1(
    instance: &Instance,
    params: &UndesignatedParams,
    strategy: &dyn ApproxFairStrategy,
    options: UndesignatedOptions,
    rng: &mut dyn RngCore,
) -> Result<UndesignatedOutcome> {
    if params.n != instance.n() {
        return Err(Error::InvalidParams(format!(
            "parameters built for n = {} but instance has {} players",
            params.n,
            instance.n()
        )));
    }
    let threshold = fair_threshold(instance.n());
    let mut oracle = Oracle::new(instance);
    oracle.set_phase(PREASSIGN_PHASE);
    let result = preassign_u(&mut oracle, params, strategy, options, rng)?;
    let mut outcome = UndesignatedOutcome {
        status: UndesignatedStatus::FailedSampling,
        sample_size: 0,
        selected: Vec::new(),
        cut_point: None,
        preassigned: Allocation::new(PREASSIGN_PHASE),
        remainder: PieceSet::empty(),
        victims: Vec::new(),
        completion: Allocation::new(COMPLETION_PHASE),
        preassigned_certificate: FairnessCertificate::default(),
        survivor_certificate: FairnessCertificate::default(),
        approx_fair_attempts: 0,
        degenerate_completion: false,
        ledger: QueryLedger::new(),
        survivors_safe: None,
        sampling_premise: None,
        expected_victims: params.victims(),
    };
    let pre = match result {
        PreassignResult::Assigned(pre) => pre,
        PreassignResult::FailedSampling { distinct } => {
            outcome.sample_size = distinct;
            outcome.ledger = oracle.into_ledger();
            return Ok(outcome);
        }
        PreassignResult::FailedApproxFair {
            sample,
            selected,
            attempts,
        } => {
            outcome.status = UndesignatedStatus::FailedApproxFair;
            outcome.sample_size = sample.len();
            outcome.selected = selected;
            outcome.approx_fair_attempts = attempts;
            outcome.ledger = oracle.into_ledger();
            return Ok(outcome);
        }
    };
    if options.verify_premises {
        let leftmost = leftmost_cutters(instance, &params.alpha_star, params.victims());
        let hits = pre.sample.iter().filter(|p| leftmost.contains(p)).count();
        outcome.sampling_premise = Some(hits >= params.r);
    }

    oracle.set_phase(COMPLETION_PHASE);
    let remainder: PieceSet = Interval::new(pre.cut_point.clone(), Rational::one())?.into();
    let chosen: BTreeSet<PlayerId> = pre.selected.iter().copied().collect();
    let pool: Vec<PlayerId> = instance.players().filter(|p| !chosen.contains(p)).collect();
    let done = completion(&mut oracle, &pool, &remainder, &params.eps)?;

    outcome.status = UndesignatedStatus::Success;
    outcome.sample_size = pre.sample.len();
    outcome.preassigned_certificate = pre.allocation.certify(instance, &threshold);
    outcome.survivor_certificate = done.allocation.certify(instance, &threshold);
    if options.verify_premises {
        outcome.survivors_safe = Some(is_safe_set(instance, &done.survivors, &remainder));
    }
    outcome.selected = pre.selected;
    outcome.cut_point = Some(pre.cut_point);
    outcome.preassigned = pre.allocation;
    outcome.approx_fair_attempts = pre.attempts;
    outcome.remainder = remainder;
    outcome.victims = done.victims;
    outcome.completion = done.allocation;
    outcome.degenerate_completion = done.degenerate;
    outcome.ledger = oracle.into_ledger();
    Ok(outcome)
}

/// Ground truth: the `m` players whose `alpha`-cuts of the whole cake are
/// leftmost (ties by id). Not charged to any ledger.
pub fn leftmost_cutters(instance: &Instance, alpha: &Rational, m: usize) -> BTreeSet<PlayerId> {
    let mut by_profile: HashMap<*const crate::valuation::Valuation, Rational> = HashMap::new();
    let mut cuts: Vec<(Rational, PlayerId)> = Vec::with_capacity(instance.n());
    for p in instance.players() {
        let shared = instance.shared_valuation(p);
        let x = by_profile
            .entry(Arc::as_ptr(shared))
            .or_insert_with(|| shared.inverse_cdf(alpha))
            .clone();
        cuts.push((x, p));
    }
    let m = m.min(cuts.len());
    if m == 0 {
        return BTreeSet::new();
    }
    if m < cuts.len() {
        cuts.select_nth_unstable(m - 1);
    }
    cuts.truncate(m);
    cuts.into_iter().map(|(_, p)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::DcAdapter;
    use crate::rational::rat;
    use crate::rng::trial_rng;
    use crate::valuation::Valuation;

    /// Always returns zero, so every uniform draw picks player 0.
    struct ZeroRng;

    impl RngCore for ZeroRng {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0);
        }
    }

    #[test]
    fn derived_parameters() {
        let p = UndesignatedParams::new(12700, 10, rat(1, 10), int(2)).unwrap();
        assert_eq!(p.draws(), 200);
        assert_eq!(p.retries(), 20);
        assert_eq!(p.alpha_star(), &rat(1280, 12700));
        assert_eq!(p.victims(), 1270);
    }

    #[test]
    fn parameter_validation() {
        assert!(UndesignatedParams::new(12700, 0, rat(1, 10), int(2)).is_err());
        assert!(UndesignatedParams::new(12700, 10, rat(0, 1), int(2)).is_err());
        assert!(UndesignatedParams::new(12700, 10, rat(11, 10), int(2)).is_err());
        assert!(UndesignatedParams::new(12700, 10, rat(1, 10), rat(3, 2)).is_err());
        assert!(UndesignatedParams::new(12700, 11, rat(1, 10), int(2)).is_err());
        // eps = 1, r = n/127: allowed by the sampling bound, but 128 r / n > 1.
        assert!(UndesignatedParams::new(127, 1, int(1), int(2)).is_err());
        assert!(UndesignatedParams::new(128, 1, int(1), int(2)).is_ok());
    }

    #[test]
    fn success_floor_arithmetic() {
        assert_eq!(sampling_success_floor(&int(2), 10), rat(1, 5));
        let f = success_floor(&int(2), 10, &int(1), 1.0 / 64.0);
        assert!((f - (1.0 - 0.8 - 1.0 / 4096.0)).abs() < 1e-12);
        assert!((success_floor(&int(2), 10, &rat(1, 10), 0.0) - 0.2).abs() < 1e-12);
        assert_eq!(success_floor(&int(2), 2, &rat(1, 10), 0.0), 0.0);
    }

    #[test]
    fn single_player_selection() {
        let inst = Instance::identical(1270, Valuation::uniform()).unwrap();
        let params = UndesignatedParams::new(1270, 1, rat(1, 10), int(2)).unwrap();
        let mut o = Oracle::new(&inst);
        let out = preassign_u(&mut o, &params, &DcAdapter, UndesignatedOptions::default(), &mut trial_rng(3, 0)).unwrap();
        let PreassignResult::Assigned(pre) = out else { panic!("expected assignment") };
        assert_eq!(pre.selected.len(), 1);
        assert_eq!(pre.cut_point, rat(128, 1270));
        assert_eq!(pre.attempts, 1);
    }

    #[test]
    fn forced_sampling_failure() {
        let inst = Instance::identical(1270, Valuation::uniform()).unwrap();
        let params = UndesignatedParams::new(1270, 2, rat(1, 5), int(2)).unwrap();
        let out = run_theorem1(&inst, &params, &DcAdapter, UndesignatedOptions::default(), &mut ZeroRng).unwrap();
        assert_eq!(out.status, UndesignatedStatus::FailedSampling);
        assert_eq!(out.sample_size, 1);
        assert!(out.preassigned.is_empty() && out.completion.is_empty());
        assert!(!out.is_success());
    }

    #[test]
    fn uniform_end_to_end() {
        let inst = Instance::identical(1270, Valuation::uniform()).unwrap();
        let params = UndesignatedParams::new(1270, 1, rat(1, 10), int(2)).unwrap();
        let options = UndesignatedOptions { charge_duplicates: false, verify_premises: true };
        let out = run_theorem1(&inst, &params, &DcAdapter, options, &mut trial_rng(11, 0)).unwrap();
        assert!(out.is_success());
        assert_eq!(out.victims.len(), 127);
        assert!(out.all_disjoint());
        assert_eq!(out.survivor_certificate.rows.len(), 1270 - 1 - 127);
        assert!(out.preassigned.is_within(&Interval::new(int(0), out.cut_point.clone().unwrap()).unwrap().into()));
        assert!(out.completion.is_within(&out.remainder));
        assert_eq!(out.survivors_safe, Some(true));
    }

    #[test]
    fn adversarial_right_mass_still_fair() {
        let right = Valuation::new(vec![rat(0, 1), rat(9, 10), rat(1, 1)], vec![int(0), int(10)]).unwrap();
        let inst = Instance::identical(1280, right).unwrap();
        let params = UndesignatedParams::new(1280, 1, rat(1, 10), int(2)).unwrap();
        let out = run_theorem1(&inst, &params, &DcAdapter, UndesignatedOptions::default(), &mut trial_rng(5, 1)).unwrap();
        assert_eq!(out.cut_point, Some(rat(9, 10) + rat(1, 100)));
        assert!(out.preassigned_certificate.all_fair());
    }

    #[test]
    fn duplicate_charging_counts_every_draw() {
        let inst = Instance::identical(1270, Valuation::uniform()).unwrap();
        let params = UndesignatedParams::new(1270, 1, rat(1, 10), int(2)).unwrap();
        let options = UndesignatedOptions { charge_duplicates: true, verify_premises: false };
        let out = run_theorem1(&inst, &params, &DcAdapter, options, &mut trial_rng(1, 0)).unwrap();
        assert_eq!(out.ledger.phase(PREASSIGN_PHASE).cut, 20);
    }

    /// A randomized strategy that never succeeds.
    struct AlwaysFails;

    impl ApproxFairStrategy for AlwaysFails {
        fn name(&self) -> &str {
            "always-fails"
        }
        fn is_randomized(&self) -> bool {
            true
        }
        fn allocate(
            &self,
            _: &mut Oracle<'_>,
            _: &[PlayerId],
            _: &PieceSet,
            _: &crate::protocols::ApproxFairContract,
            _: &mut dyn RngCore,
        ) -> Result<ApproxFairOutcome> {
            Ok(ApproxFairOutcome::Failed)
        }
    }

    #[test]
    fn exhausted_retries_fail() {
        let inst = Instance::identical(1270, Valuation::uniform()).unwrap();
        let params = UndesignatedParams::new(1270, 1, rat(1, 10), int(2)).unwrap();
        let out = run_theorem1(&inst, &params, &AlwaysFails, UndesignatedOptions::default(), &mut trial_rng(2, 0)).unwrap();
        assert_eq!(out.status, UndesignatedStatus::FailedApproxFair);
        assert_eq!(out.approx_fair_attempts, 20);
        assert_eq!(out.ledger.phase(COMPLETION_PHASE).total(), 0);
    }

    #[test]
    fn mismatched_instance_size_rejected() {
        let inst = Instance::identical(200, Valuation::uniform()).unwrap();
        let params = UndesignatedParams::new(1270, 1, rat(1, 10), int(2)).unwrap();
        assert!(run_theorem1(&inst, &params, &DcAdapter, UndesignatedOptions::default(), &mut ZeroRng).is_err());
    }
}
