use crate::cake::{Interval, PieceSet};
use crate::error::{Error, Result};
use crate::oracle::{CutAnswer, Oracle};
use crate::rational::Rational;
use crate::valuation::PlayerId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcutOutcome {
    /// Selected players in ascending order of cut point (ties by id).
    pub selected: Vec<PlayerId>,
    /// The answer each queried player gave, in query order.
    pub cut_points: Vec<(PlayerId, CutAnswer)>,
    /// Fewer than `m` players had a finite cut point.
    pub shortfall: bool,
}

impl PcutOutcome {
    pub fn point_of(&self, p: PlayerId) -> Option<&Rational> {
        self.cut_points
            .iter()
            .find(|(q, _)| *q == p)
            .and_then(|(_, c)| c.point())
    }

    /// Largest cut point among the selected players.
    pub fn max_selected_point(&self) -> Option<Rational> {
        self.selected
            .iter()
            .filter_map(|&p| self.point_of(p).cloned())
            .max()
    }
}

/// Asks each player in `q` for its `alpha`-cut of `d` and keeps the `m`
/// players with the leftmost cuts. Players without a cut point rank last and
/// are never selected.
pub fn pcut(
    oracle: &mut Oracle<'_>,
    q: &[PlayerId],
    d: &Interval,
    alpha: &Rational,
    m: usize,
) -> Result<PcutOutcome> {
    let mut cut_points = Vec::with_capacity(q.len());
    for &p in q {
        cut_points.push((p, oracle.cut(d, p, alpha)?));
    }
    let mut finite: Vec<(&Rational, PlayerId)> = cut_points
        .iter()
        .filter_map(|(p, c)| c.point().map(|x| (x, *p)))
        .collect();
    finite.sort();
    let shortfall = finite.len() < m;
    let selected = finite.into_iter().take(m).map(|(_, p)| p).collect();
    Ok(PcutOutcome {
        selected,
        cut_points,
        shortfall,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VictimizeOutcome {
    /// Remaining players, ascending by id.
    pub survivors: Vec<PlayerId>,
    /// Removed players, ascending by evaluation (ties by id).
    pub victims: Vec<PlayerId>,
}

/// Evaluates `d` for every player in `pool` and removes the `m` lowest
/// evaluators.
pub fn victimize(
    oracle: &mut Oracle<'_>,
    pool: &[PlayerId],
    d: &PieceSet,
    m: usize,
) -> Result<VictimizeOutcome> {
    if m > pool.len() {
        return Err(Error::Precondition(format!(
            "cannot victimize {m} of {} players",
            pool.len()
        )));
    }
    let mut evals: Vec<(Rational, PlayerId)> = Vec::with_capacity(pool.len());
    for &p in pool {
        // An empty piece has zero fragments and so costs no queries.
        let v = if d.is_empty() {
            Rational::default()
        } else {
            oracle.eval_piece(d, p)?
        };
        evals.push((v, p));
    }
    if m > 0 && m < evals.len() {
        evals.select_nth_unstable(m - 1);
    }
    let mut victims_ranked: Vec<(Rational, PlayerId)> = evals.drain(..m).collect();
    victims_ranked.sort();
    let victims = victims_ranked.into_iter().map(|(_, p)| p).collect();
    let mut survivors: Vec<PlayerId> = evals.into_iter().map(|(_, p)| p).collect();
    survivors.sort_unstable();
    Ok(VictimizeOutcome { survivors, victims })
}
