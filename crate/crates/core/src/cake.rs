//! Pieces of the unit cake `[0, 1]`.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// A closed subinterval `[lo, hi]` of the cake. `lo == hi` is allowed and has
/// zero measure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo < Rational::zero() || hi > Rational::one() || lo > hi {
            return Err(Error::InvalidInterval {
                lo: format_rational(&lo),
                hi: format_rational(&hi),
            });
        }
        Ok(Interval { lo, hi })
    }

    /// The whole cake.
    pub fn unit() -> Self {
        Interval {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_point(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Intersection with positive length, if any.
    pub fn overlap(&self, other: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&other.lo);
        let hi = (&self.hi).min(&other.hi);
        (lo < hi).then(|| Interval {
            lo: lo.clone(),
            hi: hi.clone(),
        })
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        (&self.lo).max(&other.lo) < (&self.hi).min(&other.hi)
    }

    pub(crate) fn new_unchecked(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            format_rational(&self.lo),
            format_rational(&self.hi)
        )
    }
}

/// A finite union of intervals kept in canonical form: sorted, positive
/// length, and with touching neighbours merged. Each stored interval is one
/// fragment for the purpose of query accounting.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PieceSet {
    fragments: Vec<Interval>,
}

impl PieceSet {
    pub fn empty() -> Self {
        PieceSet::default()
    }

    pub fn unit() -> Self {
        Interval::unit().into()
    }

    /// Builds a piece set from intervals that must not overlap with positive
    /// length. Zero-length intervals are dropped and touching ones merged.
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        let mut intervals = intervals;
        intervals.retain(|iv| !iv.is_degenerate());
        intervals.sort_by(|a, b| a.lo.cmp(&b.lo));
        for pair in intervals.windows(2) {
            if pair[1].lo < pair[0].hi {
                return Err(Error::InvalidInterval {
                    lo: format!("{} overlaps", pair[0]),
                    hi: pair[1].to_string(),
                });
            }
        }
        Ok(Self::merge_sorted(intervals))
    }

    /// Union of arbitrary (possibly overlapping) intervals.
    pub fn union_of<I: IntoIterator<Item = Interval>>(intervals: I) -> Self {
        let mut intervals: Vec<Interval> = intervals
            .into_iter()
            .filter(|iv| !iv.is_degenerate())
            .collect();
        intervals.sort_by(|a, b| a.lo.cmp(&b.lo));
        Self::merge_sorted(intervals)
    }

    fn merge_sorted(intervals: Vec<Interval>) -> Self {
        let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        PieceSet { fragments: out }
    }

    pub fn fragments(&self) -> &[Interval] {
        &self.fragments
    }

    pub fn fragment_count(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    pub fn total_length(&self) -> Rational {
        self.fragments
            .iter()
            .fold(Rational::zero(), |acc, iv| acc + iv.length())
    }

    /// Leftmost point of the piece.
    pub fn start(&self) -> Option<&Rational> {
        self.fragments.first().map(|iv| &iv.lo)
    }

    /// Rightmost point of the piece.
    pub fn end(&self) -> Option<&Rational> {
        self.fragments.last().map(|iv| &iv.hi)
    }

    /// Splits into the parts left and right of the real point `x`.
    pub fn split_at(&self, x: &Rational) -> (PieceSet, PieceSet) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for iv in &self.fragments {
            if &iv.hi <= x {
                left.push(iv.clone());
            } else if &iv.lo >= x {
                right.push(iv.clone());
            } else {
                left.push(Interval::new_unchecked(iv.lo.clone(), x.clone()));
                right.push(Interval::new_unchecked(x.clone(), iv.hi.clone()));
            }
        }
        (PieceSet { fragments: left }, PieceSet { fragments: right })
    }

    /// `[0, 1]` minus this set.
    pub fn complement(&self) -> PieceSet {
        let mut out = Vec::with_capacity(self.fragments.len() + 1);
        let mut cursor = Rational::zero();
        for iv in &self.fragments {
            if iv.lo > cursor {
                out.push(Interval::new_unchecked(cursor, iv.lo.clone()));
            }
            cursor = iv.hi.clone();
        }
        if cursor < Rational::one() {
            out.push(Interval::new_unchecked(cursor, Rational::one()));
        }
        PieceSet { fragments: out }
    }

    pub fn union(&self, other: &PieceSet) -> PieceSet {
        PieceSet::union_of(self.fragments.iter().chain(&other.fragments).cloned())
    }

    /// Length of the intersection with `other`.
    pub fn overlap_length(&self, other: &PieceSet) -> Rational {
        let mut total = Rational::zero();
        let (mut i, mut j) = (0, 0);
        while i < self.fragments.len() && j < other.fragments.len() {
            let a = &self.fragments[i];
            let b = &other.fragments[j];
            if let Some(ov) = a.overlap(b) {
                total += ov.length();
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        total
    }

    /// Disjoint up to measure zero.
    pub fn is_disjoint_from(&self, other: &PieceSet) -> bool {
        self.overlap_length(other).is_zero()
    }

    /// Every point of `self` lies in `outer`.
    pub fn is_subset_of(&self, outer: &PieceSet) -> bool {
        self.fragments
            .iter()
            .all(|iv| outer.fragments.iter().any(|o| o.contains(iv)))
    }
}

impl From<Interval> for PieceSet {
    fn from(iv: Interval) -> Self {
        if iv.is_degenerate() {
            PieceSet::empty()
        } else {
            PieceSet {
                fragments: vec![iv],
            }
        }
    }
}

impl fmt::Display for PieceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.fragments.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> = self.fragments.iter().map(|iv| iv.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// JSON form: a list of `[lo, hi]` pairs of rational strings.
impl Serialize for PieceSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[String; 2]> = self
            .fragments
            .iter()
            .map(|iv| [format_rational(&iv.lo), format_rational(&iv.hi)])
            .collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PieceSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let pairs = Vec::<[String; 2]>::deserialize(d)?;
        let mut intervals = Vec::with_capacity(pairs.len());
        for [lo, hi] in pairs {
            let lo = crate::rational::parse_rational(&lo).map_err(D::Error::custom)?;
            let hi = crate::rational::parse_rational(&hi).map_err(D::Error::custom)?;
            intervals.push(Interval::new(lo, hi).map_err(D::Error::custom)?);
        }
        PieceSet::new(intervals).map_err(D::Error::custom)
    }
}
