//! Robertson–Webb query oracle with per-phase query accounting.
//!
//! Every `Cut` and `Eval` issued by a protocol goes through [`Oracle`], which
//! answers exactly from the instance valuations and charges the
//! [`QueryLedger`]. A query against a piece made of `k` disjoint fragments is
//! answered on the virtual cake obtained by concatenating the fragments left to
//! right, and costs `k` queries.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cake::{Interval, PieceSet};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};
use crate::valuation::{Instance, PlayerId, Valuation};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCounts {
    pub cut: u64,
    pub eval: u64,
}

impl PhaseCounts {
    pub fn total(&self) -> u64 {
        self.cut + self.eval
    }
}

/// Query counters keyed by phase label. Counters only ever grow.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    phases: BTreeMap<String, PhaseCounts>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge_cut(&mut self, phase: &str, k: u64) {
        self.entry(phase).cut += k;
    }

    pub fn charge_eval(&mut self, phase: &str, k: u64) {
        self.entry(phase).eval += k;
    }

    fn entry(&mut self, phase: &str) -> &mut PhaseCounts {
        if !self.phases.contains_key(phase) {
            self.phases.insert(phase.to_owned(), PhaseCounts::default());
        }
        self.phases.get_mut(phase).expect("just inserted")
    }

    pub fn phase(&self, phase: &str) -> PhaseCounts {
        self.phases.get(phase).copied().unwrap_or_default()
    }

    pub fn phases(&self) -> &BTreeMap<String, PhaseCounts> {
        &self.phases
    }

    pub fn total(&self) -> u64 {
        self.phases.values().map(PhaseCounts::total).sum()
    }

    /// Folds another ledger into this one.
    pub fn absorb(&mut self, other: &QueryLedger) {
        for (phase, counts) in &other.phases {
            let e = self.entry(phase);
            e.cut += counts.cut;
            e.eval += counts.eval;
        }
    }
}

/// Result of a cut query.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CutAnswer {
    At(Rational),
    /// The player values the piece below the requested amount.
    NoSuchPoint,
}

impl CutAnswer {
    pub fn point(&self) -> Option<&Rational> {
        match self {
            CutAnswer::At(x) => Some(x),
            CutAnswer::NoSuchPoint => None,
        }
    }
}

/// The query kinds accepted by [`Oracle::fragmented_query`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Query {
    Cut { alpha: Rational },
    /// Value of the prefix up to the real point `x`.
    EvalPrefix { x: Rational },
    /// Value of the whole piece.
    EvalAll,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Cut(CutAnswer),
    Value(Rational),
}

const MEMO_LIMIT: usize = 1 << 14;

/// Query oracle over one instance. Single writer per protocol run.
pub struct Oracle<'a> {
    instance: &'a Instance,
    ledger: QueryLedger,
    phase: String,
    // Answers for valuations shared by several players; the ledger is charged
    // on every query regardless.
    memo: HashMap<u64, Vec<(MemoKey, Answer)>>,
    memo_len: usize,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct MemoKey {
    valuation: usize,
    fragments: Vec<Interval>,
    query: Query,
}

impl<'a> Oracle<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Oracle {
            instance,
            ledger: QueryLedger::new(),
            phase: "default".to_owned(),
            memo: HashMap::new(),
            memo_len: 0,
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    /// Subsequent queries are charged to `phase`.
    pub fn set_phase(&mut self, phase: &str) {
        phase.clone_into(&mut self.phase);
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.ledger
    }

    fn check_player(&self, p: PlayerId) -> Result<()> {
        if p >= self.instance.n() {
            return Err(Error::Precondition(format!(
                "player {p} out of range (n = {})",
                self.instance.n()
            )));
        }
        Ok(())
    }

    /// `Cut(D, p, alpha)`: the smallest `x` in `D` with `mu_p([D.lo, x]) = alpha`.
    pub fn cut(&mut self, d: &Interval, p: PlayerId, alpha: &Rational) -> Result<CutAnswer> {
        match self.query(std::slice::from_ref(d), p, Query::Cut { alpha: alpha.clone() })? {
            Answer::Cut(c) => Ok(c),
            Answer::Value(_) => unreachable!(),
        }
    }

    /// `Eval(D, p)`: the value of the whole interval.
    pub fn eval(&mut self, d: &Interval, p: PlayerId) -> Result<Rational> {
        self.value_query(std::slice::from_ref(d), p, Query::EvalAll)
    }

    /// `Eval(D, p, x)`: the value of `[D.lo, x]`.
    pub fn eval_prefix(&mut self, d: &Interval, p: PlayerId, x: &Rational) -> Result<Rational> {
        self.value_query(std::slice::from_ref(d), p, Query::EvalPrefix { x: x.clone() })
    }

    pub fn cut_piece(&mut self, s: &PieceSet, p: PlayerId, alpha: &Rational) -> Result<CutAnswer> {
        match self.fragmented_query(s, p, Query::Cut { alpha: alpha.clone() })? {
            Answer::Cut(c) => Ok(c),
            Answer::Value(_) => unreachable!(),
        }
    }

    pub fn eval_piece(&mut self, s: &PieceSet, p: PlayerId) -> Result<Rational> {
        self.value_query(s.fragments(), p, Query::EvalAll)
    }

    pub fn eval_piece_prefix(&mut self, s: &PieceSet, p: PlayerId, x: &Rational) -> Result<Rational> {
        self.value_query(s.fragments(), p, Query::EvalPrefix { x: x.clone() })
    }

    /// Answers a query on the virtual contiguous cake formed by the fragments
    /// of `s`, charging one query per fragment.
    pub fn fragmented_query(&mut self, s: &PieceSet, p: PlayerId, query: Query) -> Result<Answer> {
        if s.is_empty() {
            return Err(Error::Precondition("query on an empty piece".into()));
        }
        self.query(s.fragments(), p, query)
    }

    /// `Eval(S, p)` followed by `Cut(S, p, share * Eval(S, p))`, charged as
    /// those two queries. Fragment endpoint values are computed once.
    pub fn eval_then_cut(&mut self, s: &PieceSet, p: PlayerId, share: &Rational) -> Result<(Rational, CutAnswer)> {
        if s.is_empty() {
            return Err(Error::Precondition("query on an empty piece".into()));
        }
        if *share < Rational::zero() || *share > Rational::one() {
            return Err(Error::Precondition(format!(
                "cut share {} outside [0, 1]",
                format_rational(share)
            )));
        }
        self.check_player(p)?;
        let shared = self.instance.shared_valuation(p);
        if Arc::strong_count(shared) > 1 {
            let value = self.eval_piece(s, p)?;
            let cut = self.cut_piece(s, p, &(&value * share))?;
            return Ok((value, cut));
        }
        let k = s.fragment_count() as u64;
        self.ledger.charge_eval(&self.phase, k);
        self.ledger.charge_cut(&self.phase, k);
        let v: &Valuation = shared;
        let ends: Vec<(Rational, Rational)> = s
            .fragments()
            .iter()
            .map(|iv| (v.cdf(iv.lo()), v.cdf(iv.hi())))
            .collect();
        let value = ends.iter().fold(Rational::zero(), |acc, (a, b)| acc + (b - a));
        let alpha = &value * share;
        let cut = cut_over(v, s.fragments(), &ends, &alpha);
        Ok((value, cut))
    }

    fn value_query(&mut self, fragments: &[Interval], p: PlayerId, query: Query) -> Result<Rational> {
        if fragments.is_empty() {
            return Err(Error::Precondition("query on an empty piece".into()));
        }
        match self.query(fragments, p, query)? {
            Answer::Value(v) => Ok(v),
            Answer::Cut(_) => unreachable!(),
        }
    }

    fn query(&mut self, fragments: &[Interval], p: PlayerId, query: Query) -> Result<Answer> {
        self.check_player(p)?;
        validate(fragments, &query)?;
        let k = fragments.len() as u64;
        match query {
            Query::Cut { .. } => self.ledger.charge_cut(&self.phase, k),
            _ => self.ledger.charge_eval(&self.phase, k),
        }
        let shared = self.instance.shared_valuation(p);
        if Arc::strong_count(shared) == 1 {
            return Ok(answer(shared, fragments, &query));
        }
        let key_ptr = Arc::as_ptr(shared) as usize;
        let mut hasher = DefaultHasher::new();
        key_ptr.hash(&mut hasher);
        fragments.hash(&mut hasher);
        query.hash(&mut hasher);
        let h = hasher.finish();
        if let Some(bucket) = self.memo.get(&h) {
            for (key, ans) in bucket {
                if key.valuation == key_ptr && key.fragments == fragments && key.query == query {
                    return Ok(ans.clone());
                }
            }
        }
        let ans = answer(shared, fragments, &query);
        if self.memo_len >= MEMO_LIMIT {
            self.memo.clear();
            self.memo_len = 0;
        }
        self.memo.entry(h).or_default().push((
            MemoKey {
                valuation: key_ptr,
                fragments: fragments.to_vec(),
                query,
            },
            ans.clone(),
        ));
        self.memo_len += 1;
        Ok(ans)
    }
}

fn validate(fragments: &[Interval], query: &Query) -> Result<()> {
    match query {
        Query::Cut { alpha } => {
            if *alpha < Rational::zero() || *alpha > Rational::one() {
                return Err(Error::Precondition(format!(
                    "cut target {} outside [0, 1]",
                    format_rational(alpha)
                )));
            }
        }
        Query::EvalPrefix { x } => {
            let lo = fragments[0].lo();
            let hi = fragments[fragments.len() - 1].hi();
            if x < lo || x > hi {
                return Err(Error::Precondition(format!(
                    "eval point {} outside [{}, {}]",
                    format_rational(x),
                    format_rational(lo),
                    format_rational(hi)
                )));
            }
        }
        Query::EvalAll => {}
    }
    Ok(())
}

/// Pure answer computation; `fragments` are sorted and disjoint.
fn answer(v: &Valuation, fragments: &[Interval], query: &Query) -> Answer {
    match query {
        Query::EvalAll => Answer::Value(
            fragments
                .iter()
                .fold(Rational::zero(), |acc, iv| acc + v.interval_value(iv)),
        ),
        Query::EvalPrefix { x } => {
            let mut acc = Rational::zero();
            for iv in fragments {
                if iv.lo() >= x {
                    break;
                }
                if iv.hi() <= x {
                    acc += v.interval_value(iv);
                } else {
                    acc += v.cdf(x) - v.cdf(iv.lo());
                }
            }
            Answer::Value(acc)
        }
        Query::Cut { alpha } => {
            let ends: Vec<(Rational, Rational)> = fragments
                .iter()
                .map(|iv| (v.cdf(iv.lo()), v.cdf(iv.hi())))
                .collect();
            Answer::Cut(cut_over(v, fragments, &ends, alpha))
        }
    }
}

/// Walks the fragments with their endpoint cdf values until `alpha` of mass
/// has accumulated.
fn cut_over(v: &Valuation, fragments: &[Interval], ends: &[(Rational, Rational)], alpha: &Rational) -> CutAnswer {
    let mut acc = Rational::zero();
    for (iv, (start, end)) in fragments.iter().zip(ends) {
        let mass = end - start;
        let needed = alpha - &acc;
        if needed <= mass {
            let x = v.inverse_cdf(&(start + needed));
            let x = if &x < iv.lo() { iv.lo().clone() } else { x };
            return CutAnswer::At(x);
        }
        acc += mass;
    }
    CutAnswer::NoSuchPoint
}
