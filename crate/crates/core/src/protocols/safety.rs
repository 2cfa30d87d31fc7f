//! Ground-truth safety predicates. These read valuations directly and are
//! never charged to a query ledger.


use crate::cake::PieceSet;
use crate::rational::{int, Rational};
use crate::valuation::{Instance, PlayerId};

/// `mu_p(d) >= group_size / n`.
pub fn is_safe(instance: &Instance, p: PlayerId, group_size: usize, d: &PieceSet) -> bool {
    value_meets(instance.value(p, d), group_size, instance.n())
}

fn value_meets(value: Rational, group_size: usize, n: usize) -> bool {
    value * int(n as i64) >= int(group_size as i64)
}

/// Every member of `q` is safe with respect to `(q, d)`.
pub fn is_safe_set(instance: &Instance, q: &[PlayerId], d: &PieceSet) -> bool {
    q.iter().all(|&p| is_safe(instance, p, q.len(), d))
}

/// Some subset of at most `m` members can be removed so the rest is safe.
///
/// Dropping the lowest-valued member both removes the weakest candidate and
/// lowers everyone's threshold, so trying the `j` lowest for `j = 0..=m` is
/// exhaustive.
pub fn m_safe(instance: &Instance, q: &[PlayerId], d: &PieceSet, m: usize) -> bool {
    let mut values: Vec<Rational> = q.iter().map(|&p| instance.value(p, d)).collect();
    values.sort();
    let n = instance.n();
    (0..=m.min(values.len())).any(|dropped| {
        let remaining = values.len() - dropped;
        remaining == 0 || value_meets(values[dropped].clone(), remaining, n)
    })
}

/// Players valuing `d` at least `alpha`.
pub fn approvers(instance: &Instance, alpha: &Rational, d: &PieceSet) -> Vec<PlayerId> {
    instance
        .players()
        .filter(|&p| instance.value(p, d) >= *alpha)
        .collect()
}
