//! Even–Paz divide and conquer.
//!
//! With `k` players on a piece, every player evaluates the piece and marks the
//! point where its own prefix value reaches `floor(k/2)/k` of that evaluation.
//! The `floor(k/2)` players with the leftmost marks take the part left of the
//! largest of their marks and recurse; the rest take the right part. Each
//! player takes part in at most `ceil(log2 k)` rounds of two queries.


use crate::cake::PieceSet;
use crate::error::{Error, Result};
use crate::oracle::{CutAnswer, Oracle};
use crate::rational::{rat, Rational};
use crate::valuation::PlayerId;

use super::allocation::Allocation;

/// Proportional division of `piece` among `players`: each player receives at
/// least `1/|players|` of its own value of `piece`.
pub fn dc(oracle: &mut Oracle<'_>, players: &[PlayerId], piece: &PieceSet) -> Result<Allocation> {
    let mut allocation = Allocation::new(oracle.phase());
    split(oracle, players.to_vec(), piece.clone(), &mut allocation)?;
    Ok(allocation)
}

fn split(
    oracle: &mut Oracle<'_>,
    players: Vec<PlayerId>,
    piece: PieceSet,
    out: &mut Allocation,
) -> Result<()> {
    let k = players.len();
    if k == 0 {
        return Ok(());
    }
    if k == 1 || piece.is_empty() {
        // An empty piece is worth zero to everyone; no query can add anything.
        for p in players {
            out.assign(p, piece.clone());
        }
        return Ok(());
    }
    let half = k / 2;
    let share = rat(half as i64, k as i64);
    let mut marks: Vec<(Rational, PlayerId)> = Vec::with_capacity(k);
    for &p in &players {
        match oracle.eval_then_cut(&piece, p, &share)?.1 {
            CutAnswer::At(x) => marks.push((x, p)),
            CutAnswer::NoSuchPoint => {
                return Err(Error::Precondition(format!(
                    "player {p} could not mark a fraction of its own value"
                )))
            }
        }
    }
    drop(players);
    marks.select_nth_unstable(half - 1);
    let boundary = marks[half - 1].0.clone();
    let right_players: Vec<PlayerId> = marks.drain(half..).map(|(_, p)| p).collect();
    let left_players: Vec<PlayerId> = marks.into_iter().map(|(_, p)| p).collect();
    let (left, right) = piece.split_at(&boundary);
    drop(piece);
    split(oracle, left_players, left, out)?;
    split(oracle, right_players, right, out)
}

/// `2 k ceil(log2 k)`, the query budget of [`dc`] on a contiguous piece.
pub fn dc_query_bound(k: usize) -> u64 {
    if k <= 1 {
        return 0;
    }
    let levels = usize::BITS - (k - 1).leading_zeros();
    2 * k as u64 * levels as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cake::Interval;
    use crate::rational::{int, rat};
    use crate::valuation::{Instance, Valuation};

    #[test]
    fn singleton_gets_everything() {
        let inst = Instance::identical(1, Valuation::uniform()).unwrap();
        let mut o = Oracle::new(&inst);
        let a = dc(&mut o, &[0], &PieceSet::unit()).unwrap();
        assert_eq!(a.get(0), Some(&PieceSet::unit()));
        assert_eq!(o.ledger().total(), 0);
    }

    #[test]
    fn uniform_against_right_heavy() {
        let right = Valuation::new(vec![rat(0, 1), rat(1, 2), rat(1, 1)], vec![int(0), int(2)]).unwrap();
        let inst = Instance::from_valuations(vec![Valuation::uniform(), right]).unwrap();
        let mut o = Oracle::new(&inst);
        let a = dc(&mut o, &[0, 1], &PieceSet::unit()).unwrap();
        assert_eq!(a.get(0), Some(&Interval::new(int(0), rat(1, 2)).unwrap().into()));
        assert_eq!(a.get(1), Some(&Interval::new(rat(1, 2), int(1)).unwrap().into()));
        assert_eq!(inst.value(0, a.get(0).unwrap()), rat(1, 2));
        assert_eq!(inst.value(1, a.get(1).unwrap()), int(1));
        assert_eq!(o.ledger().total(), 4);
    }

    #[test]
    fn identical_uniform_players_get_exact_shares() {
        for n in 1..=16usize {
            let inst = Instance::identical(n, Valuation::uniform()).unwrap();
            let mut o = Oracle::new(&inst);
            let players: Vec<_> = inst.players().collect();
            let a = dc(&mut o, &players, &PieceSet::unit()).unwrap();
            assert!(a.is_pairwise_disjoint());
            for p in players {
                assert_eq!(inst.value(p, a.get(p).unwrap()), rat(1, n as i64));
            }
            assert!(o.ledger().total() <= dc_query_bound(n));
        }
    }

    #[test]
    fn query_bound_values() {
        assert_eq!(dc_query_bound(1), 0);
        assert_eq!(dc_query_bound(2), 4);
        assert_eq!(dc_query_bound(3), 12);
        assert_eq!(dc_query_bound(4), 16);
        assert_eq!(dc_query_bound(5), 30);
        assert_eq!(dc_query_bound(1024), 20480);
    }
}
