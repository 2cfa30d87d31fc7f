//! The approximate-fair division contract.
//!
//! A strategy divides a piece among `k` players so that, on success, every
//! player receives at least `1/(c k)` of its own value of the piece. Linear
//! query randomized constructions exist for `c > 32`, succeeding with
//! probability at least `1 - failure_bound(c)`. The built-in [`DcAdapter`]
//! satisfies the contract for every `c >= 1` with failure probability zero, at
//! the price of `O(k log k)` queries.

use num_traits::{One, Zero};
use rand::RngCore;

use crate::cake::PieceSet;
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rational::{int, Rational};
use crate::valuation::{Instance, PlayerId};

use super::allocation::Allocation;
use super::dc::dc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxFairContract {
    c: Rational,
}

impl ApproxFairContract {
    pub fn new(c: Rational) -> Result<Self> {
        if c < Rational::one() {
            return Err(Error::InvalidParams("approximation factor c must be >= 1".into()));
        }
        Ok(ApproxFairContract { c })
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    /// `2^13/(c^2 (c - 32)) + 1024/c^3 + 128/c^2`, defined for `c > 32`.
    pub fn failure_bound(&self) -> Option<Rational> {
        failure_bound(&self.c)
    }

    /// Whether the failure bound exists and lies below `p`.
    pub fn failure_below(&self, p: &Rational) -> bool {
        self.failure_bound().is_some_and(|b| b < *p && b >= Rational::zero())
    }

    /// Value each of `k` players must receive from a piece it values at
    /// `piece_value`.
    pub fn guaranteed_share(&self, piece_value: &Rational, k: usize) -> Rational {
        piece_value / (&self.c * int(k as i64))
    }

    /// Checks an allocation against the contract using exact values.
    pub fn holds_for(&self, instance: &Instance, allocation: &Allocation, piece: &PieceSet) -> bool {
        let k = allocation.len();
        allocation.iter().all(|(p, s)| {
            s.is_subset_of(piece)
                && instance.value(p, s) >= self.guaranteed_share(&instance.value(p, piece), k)
        }) && allocation.is_pairwise_disjoint()
    }
}

/// Failure probability bound of a linear-time `c`-fair division; `None` when
/// `c <= 32`.
pub fn failure_bound(c: &Rational) -> Option<Rational> {
    let thirty_two = int(32);
    if *c <= thirty_two {
        return None;
    }
    let c2 = c * c;
    let c3 = &c2 * c;
    Some(int(8192) / (&c2 * (c - thirty_two)) + int(1024) / c3 + int(128) / c2)
}

/// `2^9 / t^2`: the simplified failure bound used when `t >= 64` players'
/// worth of slack is available.
pub fn simplified_failure_bound(t: &Rational) -> Rational {
    int(512) / (t * t)
}

pub enum ApproxFairOutcome {
    Success(Allocation),
    Failed,
}

impl ApproxFairOutcome {
    pub fn allocation(&self) -> Option<&Allocation> {
        match self {
            ApproxFairOutcome::Success(a) => Some(a),
            ApproxFairOutcome::Failed => None,
        }
    }
}

/// An implementation of the approximate-fair contract.
pub trait ApproxFairStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Whether repeated attempts can produce different results.
    fn is_randomized(&self) -> bool;

    fn allocate(
        &self,
        oracle: &mut Oracle<'_>,
        players: &[PlayerId],
        piece: &PieceSet,
        contract: &ApproxFairContract,
        rng: &mut dyn RngCore,
    ) -> Result<ApproxFairOutcome>;
}

/// Exact proportional division standing in for a linear-time approximate
/// one. Never fails.
#[derive(Clone, Copy, Debug, Default)]
pub struct DcAdapter;

impl ApproxFairStrategy for DcAdapter {
    fn name(&self) -> &str {
        "dc-adapter"
    }

    fn is_randomized(&self) -> bool {
        false
    }

    fn allocate(
        &self,
        oracle: &mut Oracle<'_>,
        players: &[PlayerId],
        piece: &PieceSet,
        _contract: &ApproxFairContract,
        _rng: &mut dyn RngCore,
    ) -> Result<ApproxFairOutcome> {
        Ok(ApproxFairOutcome::Success(dc(oracle, players, piece)?))
    }
}

/// Runs `strategy` once under the contract with factor `c`.
pub fn approx_fair(
    strategy: &dyn ApproxFairStrategy,
    oracle: &mut Oracle<'_>,
    players: &[PlayerId],
    piece: &PieceSet,
    c: &Rational,
    rng: &mut dyn RngCore,
) -> Result<ApproxFairOutcome> {
    let contract = ApproxFairContract::new(c.clone())?;
    if players.is_empty() {
        return Ok(ApproxFairOutcome::Success(Allocation::new(oracle.phase())));
    }
    strategy.allocate(oracle, players, piece, &contract, rng)
}
