use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cake::PieceSet;
use crate::rational::{int, rat, serde_rational, Rational};
use crate::valuation::{Instance, PlayerId};

/// Pieces handed to players by one protocol phase.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Allocation {
    assignments: BTreeMap<PlayerId, PieceSet>,
    phase: String,
}

impl Allocation {
    pub fn new(phase: &str) -> Self {
        Allocation {
            assignments: BTreeMap::new(),
            phase: phase.to_owned(),
        }
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    pub fn assign(&mut self, p: PlayerId, piece: PieceSet) {
        self.assignments.insert(p, piece);
    }

    pub fn get(&self, p: PlayerId) -> Option<&PieceSet> {
        self.assignments.get(&p)
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        self.assignments.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlayerId, &PieceSet)> {
        self.assignments.iter().map(|(p, s)| (*p, s))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Moves every assignment of `other` into `self`.
    pub fn extend(&mut self, other: Allocation) {
        self.assignments.extend(other.assignments);
    }

    /// No two assigned pieces overlap with positive length.
    pub fn is_pairwise_disjoint(&self) -> bool {
        let mut all: Vec<_> = self
            .assignments
            .values()
            .flat_map(|s| s.fragments().iter())
            .collect();
        all.sort_by(|a, b| a.lo().cmp(b.lo()));
        all.windows(2).all(|w| w[1].lo() >= w[0].hi())
    }

    /// Every assigned piece lies inside `outer`.
    pub fn is_within(&self, outer: &PieceSet) -> bool {
        self.assignments.values().all(|s| s.is_subset_of(outer))
    }

    /// Certifies every assignment against a common threshold using exact
    /// ground-truth values.
    pub fn certify(&self, instance: &Instance, threshold: &Rational) -> FairnessCertificate {
        FairnessCertificate {
            rows: self
                .assignments
                .iter()
                .map(|(&p, s)| CertificateRow::new(p, instance.value(p, s), threshold.clone()))
                .collect(),
        }
    }

    pub fn to_record(&self, certificate: Option<&FairnessCertificate>) -> AllocationRecord {
        AllocationRecord {
            phase: self.phase.clone(),
            assignments: self
                .assignments
                .iter()
                .map(|(p, s)| (p.to_string(), s.clone()))
                .collect(),
            certificate: certificate.map(|c| c.rows.clone()).unwrap_or_default(),
        }
    }
}

/// `1/n`.
pub fn fair_threshold(n: usize) -> Rational {
    rat(1, n as i64)
}

/// `1/(c n)`.
pub fn c_fair_threshold(c: &Rational, n: usize) -> Rational {
    int(1) / (c * int(n as i64))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub player: PlayerId,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    #[serde(with = "serde_rational")]
    pub threshold: Rational,
    pub fair: bool,
}

impl CertificateRow {
    pub fn new(player: PlayerId, value: Rational, threshold: Rational) -> Self {
        let fair = value >= threshold;
        CertificateRow {
            player,
            value,
            threshold,
            fair,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessCertificate {
    pub rows: Vec<CertificateRow>,
}

impl FairnessCertificate {
    pub fn all_fair(&self) -> bool {
        self.rows.iter().all(|r| r.fair)
    }

    pub fn fair_count(&self) -> usize {
        self.rows.iter().filter(|r| r.fair).count()
    }

    pub fn unfair_players(&self) -> Vec<PlayerId> {
        self.rows.iter().filter(|r| !r.fair).map(|r| r.player).collect()
    }

    pub fn min_value(&self) -> Option<&Rational> {
        self.rows.iter().map(|r| &r.value).min()
    }
}

/// JSON form of an allocation: player id to `[lo, hi]` pairs, followed by
/// certificate rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationRecord {
    pub phase: String,
    pub assignments: BTreeMap<String, PieceSet>,
    pub certificate: Vec<CertificateRow>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cake::Interval;
    use crate::rational::{int, rat};
    use crate::valuation::Valuation;

    #[test]
    fn disjointness_and_certificates() {
        let inst = Instance::identical(2, Valuation::uniform()).unwrap();
        let mut a = Allocation::new("t");
        a.assign(0, Interval::new(int(0), rat(1, 2)).unwrap().into());
        a.assign(1, Interval::new(rat(1, 2), int(1)).unwrap().into());
        assert!(a.is_pairwise_disjoint());
        let cert = a.certify(&inst, &fair_threshold(2));
        assert!(cert.all_fair());
        a.assign(1, Interval::new(rat(1, 4), int(1)).unwrap().into());
        assert!(!a.is_pairwise_disjoint());
        let cert = a.certify(&inst, &rat(3, 5));
        assert_eq!(cert.unfair_players(), vec![0]);
        assert_eq!(cert.min_value(), Some(&rat(1, 2)));
    }

    #[test]
    fn record_json_shape() {
        let inst = Instance::identical(1, Valuation::uniform()).unwrap();
        let mut a = Allocation::new("dc");
        a.assign(0, PieceSet::unit());
        let cert = a.certify(&inst, &fair_threshold(1));
        let json = serde_json::to_string(&a.to_record(Some(&cert))).unwrap();
        assert_eq!(
            json,
            r#"{"phase":"dc","assignments":{"0":[["0","1"]]},"certificate":[{"player":0,"value":"1","threshold":"1","fair":true}]}"#
        );
    }

    #[test]
    fn thresholds() {
        assert_eq!(fair_threshold(8), rat(1, 8));
        assert_eq!(c_fair_threshold(&int(128), 2), rat(1, 256));
    }
}
