//! Preassignment to a fixed set of designated players.
//!
//! Each designated player runs a deposit: starting from the whole cake, a
//! random multiset of players evaluates the current piece; while enough of
//! them still value it at `eps' = eps/r` or more, the piece is condensed to
//! the half (split at the median of the sampled players' half-value points)
//! that the designated player prefers. Deposit pieces that overlap are grouped
//! through the relation graph and each group shares its union by divide and
//! conquer. Completion then runs on the complement of all deposit pieces,
//! which has at most `r + 1` fragments.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use petgraph::unionfind::UnionFind;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::cake::{Interval, PieceSet};
use crate::error::{Error, Result};
use crate::oracle::{CutAnswer, Oracle, QueryLedger};
use crate::protocols::{approvers, dc, fair_threshold, is_safe_set, Allocation, FairnessCertificate};
use crate::rational::{floor_to_u64, format_rational, half_pow, int, rat, to_f64, Rational};
use crate::undesignated::{completion, draw_players, COMPLETION_PHASE, PREASSIGN_PHASE};
use crate::valuation::{Instance, PlayerId};

#[derive(Clone, Debug, PartialEq)]
pub struct DesignatedParams {
    designated: Vec<PlayerId>,
    eps: Rational,
    t: Rational,
    scale: Rational,
    eps_prime: Rational,
    samples_per_round: u64,
    max_rounds: u64,
    approver_threshold: f64,
}

impl DesignatedParams {
    /// Requires `0 < eps <= 1/e`, `t >= 1`, `0 < scale <= 1`, and distinct
    /// designated ids below `n`. With `scale = 1` the sampling constants are
    /// `h = ceil(2^10 t ln(1/eps') / eps')`, `ceil(54 ln(1/eps')^2)` rounds, and
    /// an approver threshold of `2^9 t ln(1/eps')`; a smaller scale multiplies
    /// all three before rounding up.
    pub fn new(
        n: usize,
        designated: Vec<PlayerId>,
        eps: Rational,
        t: Rational,
        scale: Rational,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if designated.is_empty() {
            return bad("at least one designated player is required".into());
        }
        let distinct: BTreeSet<_> = designated.iter().collect();
        if distinct.len() != designated.len() {
            return bad("designated players must be distinct".into());
        }
        if let Some(p) = designated.iter().find(|&&p| p >= n) {
            return bad(format!("designated player {p} out of range (n = {n})"));
        }
        if eps <= Rational::zero() || to_f64(&eps) > (-1.0f64).exp() {
            return bad(format!("eps = {} must lie in (0, 1/e]", format_rational(&eps)));
        }
        if t < Rational::one() {
            return bad(format!("t = {} must be at least 1", format_rational(&t)));
        }
        if scale <= Rational::zero() || scale > Rational::one() {
            return bad(format!("scale = {} must lie in (0, 1]", format_rational(&scale)));
        }
        let r = designated.len();
        let eps_prime = &eps / int(r as i64);
        let ln_inv = (1.0 / to_f64(&eps_prime)).ln();
        let sigma = to_f64(&scale);
        let tf = to_f64(&t);
        let samples_per_round = (sigma * 1024.0 * tf * ln_inv / to_f64(&eps_prime)).ceil() as u64;
        let max_rounds = (sigma * 54.0 * ln_inv * ln_inv).ceil() as u64;
        let approver_threshold = sigma * 512.0 * tf * ln_inv;
        Ok(DesignatedParams {
            designated,
            eps,
            t,
            scale,
            eps_prime,
            samples_per_round: samples_per_round.max(1),
            max_rounds: max_rounds.max(1),
            approver_threshold,
        })
    }

    pub fn designated(&self) -> &[PlayerId] {
        &self.designated
    }

    pub fn r(&self) -> usize {
        self.designated.len()
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    /// `eps / r`.
    pub fn eps_prime(&self) -> &Rational {
        &self.eps_prime
    }

    /// Players sampled per deposit round (`h`).
    pub fn samples_per_round(&self) -> u64 {
        self.samples_per_round
    }

    pub fn max_rounds(&self) -> u64 {
        self.max_rounds
    }

    pub fn approver_threshold(&self) -> f64 {
        self.approver_threshold
    }
}

/// `(7 ln(r/eps))^2 <= ln n`, the regime in which every designated player's
/// guaranteed share is at least `1/n`.
pub fn fairness_regime_holds(r: usize, eps: &Rational, n: usize) -> bool {
    let x = 7.0 * (r as f64 / to_f64(eps)).ln();
    x * x <= (n as f64).ln()
}

/// `1 - (eps/r)^t`.
pub fn success_floor(eps: &Rational, r: usize, t: &Rational) -> f64 {
    1.0 - (to_f64(eps) / r as f64).powf(to_f64(t))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondenseOutcome {
    pub piece: Interval,
    /// Half-value marks `(x_q, q)` in multiset order.
    pub marks: Vec<(Rational, PlayerId)>,
    pub median_player: PlayerId,
    pub median_point: Rational,
    pub value_left: Rational,
    pub value_right: Rational,
}

/// Halves `piece` at the lower median of the sampled players' half-value
/// marks and keeps the side `p` values more (the right side on a tie).
pub fn condense(
    oracle: &mut Oracle<'_>,
    p: PlayerId,
    sampled: &[PlayerId],
    piece: &Interval,
) -> Result<CondenseOutcome> {
    if sampled.is_empty() {
        return Err(Error::Precondition("condense needs at least one sampled player".into()));
    }
    if piece.is_degenerate() {
        return Err(Error::Precondition(format!("condense on zero-length piece {piece}")));
    }
    let half = rat(1, 2);
    let mut marks = Vec::with_capacity(sampled.len());
    for &q in sampled {
        let beta = oracle.eval(piece, q)?;
        match oracle.cut(piece, q, &(beta * &half))? {
            CutAnswer::At(x) => marks.push((x, q)),
            CutAnswer::NoSuchPoint => unreachable!("half of a player's own value is always reachable"),
        }
    }
    let mut ranked: Vec<(&Rational, PlayerId, usize)> =
        marks.iter().enumerate().map(|(i, (x, q))| (x, *q, i)).collect();
    let mid = (ranked.len() - 1) / 2;
    ranked.select_nth_unstable(mid);
    let (median_point, median_player, _) = ranked[mid];
    let median_point = median_point.clone();
    let left = Interval::new(piece.lo().clone(), median_point.clone())?;
    let right = Interval::new(median_point.clone(), piece.hi().clone())?;
    let value_left = oracle.eval(&left, p)?;
    let value_right = oracle.eval(&right, p)?;
    let piece = if value_left > value_right { left } else { right };
    Ok(CondenseOutcome {
        piece,
        marks,
        median_player,
        median_point,
        value_left,
        value_right,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepositExit {
    /// Too few sampled players approved the piece.
    EarlyExit,
    /// The round budget ran out first.
    LoopExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepositOutcome {
    pub player: PlayerId,
    pub piece: Interval,
    pub exit: DepositExit,
    pub rounds: u64,
    pub condense_calls: u32,
    /// The piece at the start of every round, starting with the whole cake.
    pub trace: Vec<Interval>,
}

/// Finds a piece `p` likes that few other players value at `eps'` or more.
pub fn deposit(
    oracle: &mut Oracle<'_>,
    p: PlayerId,
    params: &DesignatedParams,
    rng: &mut dyn RngCore,
) -> Result<DepositOutcome> {
    let n = oracle.n();
    let mut piece = Interval::unit();
    let mut trace = Vec::new();
    let mut condense_calls = 0;
    for round in 1..=params.max_rounds {
        trace.push(piece.clone());
        let sampled = draw_players(rng, n, params.samples_per_round);
        let mut approving = Vec::with_capacity(sampled.len());
        for q in sampled {
            if oracle.eval(&piece, q)? >= params.eps_prime {
                approving.push(q);
            }
        }
        if (approving.len() as f64) < params.approver_threshold {
            return Ok(DepositOutcome {
                player: p,
                piece,
                exit: DepositExit::EarlyExit,
                rounds: round,
                condense_calls,
                trace,
            });
        }
        piece = condense(oracle, p, &approving, &piece)?.piece;
        condense_calls += 1;
    }
    Ok(DepositOutcome {
        player: p,
        piece,
        exit: DepositExit::LoopExhausted,
        rounds: params.max_rounds,
        condense_calls,
        trace,
    })
}

/// Overlap graph on deposit pieces. Vertices are indexed in input order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationGraph {
    pub edges: Vec<(usize, usize)>,
    /// Vertex indices per connected component, each sorted, ordered by their
    /// smallest member.
    pub components: Vec<Vec<usize>>,
}

impl RelationGraph {
    /// Edges join pieces whose intersection has positive length.
    pub fn build(pieces: &[Interval]) -> Self {
        let mut uf = UnionFind::<usize>::new(pieces.len());
        let mut edges = Vec::new();
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if pieces[i].overlaps(&pieces[j]) {
                    edges.push((i, j));
                    uf.union(i, j);
                }
            }
        }
        let labels = uf.into_labeling();
        let mut components: Vec<Vec<usize>> = Vec::new();
        let mut slot_of_root = std::collections::HashMap::new();
        for (i, root) in labels.into_iter().enumerate() {
            let slot = *slot_of_root.entry(root).or_insert_with(|| {
                components.push(Vec::new());
                components.len() - 1
            });
            components[slot].push(i);
        }
        RelationGraph { edges, components }
    }
}

#[derive(Clone, Debug)]
pub struct PreassignS {
    pub deposits: Vec<DepositOutcome>,
    pub graph: RelationGraph,
    pub allocation: Allocation,
}

impl PreassignS {
    /// Size of the component holding the `i`-th designated player.
    pub fn component_size(&self, i: usize) -> usize {
        self.graph
            .components
            .iter()
            .find(|c| c.contains(&i))
            .map_or(1, Vec::len)
    }

    /// Union of every deposit piece.
    pub fn deposited(&self) -> PieceSet {
        PieceSet::union_of(self.deposits.iter().map(|d| d.piece.clone()))
    }
}

/// Deposits for every designated player, then joint division inside each
/// overlap component.
pub fn preassign_s(
    oracle: &mut Oracle<'_>,
    params: &DesignatedParams,
    rng: &mut dyn RngCore,
) -> Result<PreassignS> {
    let mut deposits = Vec::with_capacity(params.r());
    for &p in &params.designated {
        deposits.push(deposit(oracle, p, params, rng)?);
    }
    let pieces: Vec<Interval> = deposits.iter().map(|d| d.piece.clone()).collect();
    let graph = RelationGraph::build(&pieces);
    let mut allocation = Allocation::new(oracle.phase());
    for component in &graph.components {
        let players: Vec<PlayerId> = component.iter().map(|&i| deposits[i].player).collect();
        let union = PieceSet::union_of(component.iter().map(|&i| pieces[i].clone()));
        allocation.extend(dc(oracle, &players, &union)?);
    }
    Ok(PreassignS {
        deposits,
        graph,
        allocation,
    })
}

#[derive(Clone, Debug)]
pub struct DesignatedOutcome {
    pub preassign: PreassignS,
    pub remainder: PieceSet,
    pub victims: Vec<PlayerId>,
    pub completion: Allocation,
    /// Designated players against `1/n`.
    pub designated_certificate: FairnessCertificate,
    /// Designated players against `(1/2)^(condense calls) / (component size)`.
    pub designated_floor_certificate: FairnessCertificate,
    pub survivor_certificate: FairnessCertificate,
    /// Ground truth `|P(eps', C_p)| <= eps' n` per designated player.
    pub polite: Vec<bool>,
    /// Ground truth `|P(eps, deposited)|`.
    pub approvers_of_deposited: usize,
    pub survivors_safe: bool,
    pub loop_exhausted: bool,
    pub degenerate_completion: bool,
    pub ledger: QueryLedger,
    expected_victims: usize,
}

impl DesignatedOutcome {
    pub fn expected_victims(&self) -> usize {
        self.expected_victims
    }

    pub fn designated_disjoint(&self) -> bool {
        self.preassign.allocation.is_pairwise_disjoint()
    }

    pub fn all_polite(&self) -> bool {
        self.polite.iter().all(|&b| b)
    }

    /// Completion succeeded: designated pieces disjoint, exactly
    /// `floor(eps n)` victims, and every survivor fair.
    pub fn is_success(&self) -> bool {
        self.designated_disjoint()
            && self.victims.len() == self.expected_victims
            && self.survivor_certificate.all_fair()
    }
}

/// Both parts end to end with ground-truth certification.
pub fn run_theorem2(
    instance: &Instance,
    params: &DesignatedParams,
    rng: &mut dyn RngCore,
) -> Result<DesignatedOutcome> {
    let n = instance.n();
    if let Some(p) = params.designated.iter().find(|&&p| p >= n) {
        return Err(Error::InvalidParams(format!("designated player {p} out of range (n = {n})")));
    }
    let mut oracle = Oracle::new(instance);
    oracle.set_phase(PREASSIGN_PHASE);
    let pre = preassign_s(&mut oracle, params, rng)?;

    oracle.set_phase(COMPLETION_PHASE);
    let deposited = pre.deposited();
    let remainder = deposited.complement();
    let designated: BTreeSet<PlayerId> = params.designated.iter().copied().collect();
    let pool: Vec<PlayerId> = instance.players().filter(|p| !designated.contains(p)).collect();
    let done = completion(&mut oracle, &pool, &remainder, &params.eps)?;

    let threshold = fair_threshold(n);
    let designated_certificate = pre.allocation.certify(instance, &threshold);
    let mut floor_rows = Vec::with_capacity(params.r());
    for (i, d) in pre.deposits.iter().enumerate() {
        let k = pre.component_size(i);
        let floor = half_pow(d.condense_calls) / int(k as i64);
        let value = instance.value(d.player, pre.allocation.get(d.player).expect("every designated player is assigned"));
        floor_rows.push(crate::protocols::CertificateRow::new(d.player, value, floor));
    }
    let n_r = int(n as i64);
    let polite = pre
        .deposits
        .iter()
        .map(|d| {
            let count = approvers(instance, &params.eps_prime, &d.piece.clone().into()).len();
            int(count as i64) <= &params.eps_prime * &n_r
        })
        .collect();
    let approvers_of_deposited = approvers(instance, &params.eps, &deposited).len();
    let survivors_safe = is_safe_set(instance, &done.survivors, &remainder);
    let loop_exhausted = pre.deposits.iter().any(|d| d.exit == DepositExit::LoopExhausted);
    Ok(DesignatedOutcome {
        designated_certificate,
        designated_floor_certificate: FairnessCertificate { rows: floor_rows },
        survivor_certificate: done.allocation.certify(instance, &threshold),
        polite,
        approvers_of_deposited,
        survivors_safe,
        loop_exhausted,
        degenerate_completion: done.degenerate,
        remainder,
        victims: done.victims,
        completion: done.allocation,
        preassign: pre,
        ledger: oracle.into_ledger(),
        expected_victims: floor_to_u64(&(&params.eps * n_r)) as usize,
    })
}
