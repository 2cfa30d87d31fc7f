//! Sublinear-time proportional cake cutting with victims.
//!
//! The cake is `[0, 1]`, players hold exact piecewise-constant valuations, and
//! protocols interact with them only through Robertson–Webb `Cut`/`Eval`
//! queries routed through an [`oracle::Oracle`] that counts every query.
//!
//! - [`protocols`]: divide-and-conquer proportional division, `pcut`,
//!   `victimize`, safety predicates and the approximate-fair strategy contract.
//! - [`undesignated`]: preassign `r` sampled players in `O(tr/eps)` queries,
//!   then complete with `floor(eps n)` victims.
//! - [`designated`]: deposit/condense for a fixed set of players, overlap
//!   grouping, then completion on the fragmented remainder.
//! - [`harness`]: instance generators, seeded Monte-Carlo trials, sampling
//!   checkers and report persistence.

pub mod cake;
pub mod designated;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod protocols;
pub mod rational;
pub mod rng;
pub mod undesignated;
pub mod valuation;

pub use cake::{Interval, PieceSet};
pub use error::{Error, Result};
pub use oracle::{Answer, CutAnswer, Oracle, PhaseCounts, Query, QueryLedger};
pub use rational::{rat, Rational};
pub use valuation::{measure, Instance, PlayerId, Valuation};
