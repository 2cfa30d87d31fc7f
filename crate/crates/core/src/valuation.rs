//! Piecewise-constant value densities and problem instances.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cake::{Interval, PieceSet};
use crate::error::{Error, Result};
use crate::rational::{format_rational, rat, serde_rational_vec, Rational};

pub type PlayerId = usize;

/// A normalized value measure on `[0, 1]` with constant density between
/// consecutive breakpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Valuation {
    breakpoints: Vec<Rational>,
    densities: Vec<Rational>,
    /// `cumulative[i]` is the mass of `[0, breakpoints[i]]`.
    cumulative: Vec<Rational>,
}

impl Valuation {
    pub fn new(breakpoints: Vec<Rational>, densities: Vec<Rational>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidValuation(msg));
        if breakpoints.len() < 2 {
            return bad("need at least two breakpoints".into());
        }
        if densities.len() + 1 != breakpoints.len() {
            return bad(format!(
                "{} breakpoints need {} densities, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                densities.len()
            ));
        }
        if !breakpoints[0].is_zero() || !breakpoints[breakpoints.len() - 1].is_one() {
            return bad("breakpoints must start at 0 and end at 1".into());
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("breakpoints must be strictly ascending".into());
        }
        if densities.iter().any(|d| *d < Rational::zero()) {
            return bad("densities must be nonnegative".into());
        }
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        let mut acc = Rational::zero();
        cumulative.push(acc.clone());
        for (w, d) in breakpoints.windows(2).zip(&densities) {
            acc += d * (&w[1] - &w[0]);
            cumulative.push(acc.clone());
        }
        if !acc.is_one() {
            return bad(format!("total mass is {}, expected 1", format_rational(&acc)));
        }
        Ok(Valuation {
            breakpoints,
            densities,
            cumulative,
        })
    }

    /// Density 1 everywhere.
    pub fn uniform() -> Self {
        Valuation::new(
            vec![Rational::zero(), Rational::one()],
            vec![Rational::one()],
        )
        .expect("uniform density is normalized")
    }

    /// Builds a valuation from nonnegative block weights over the given
    /// breakpoints, rescaling so the total mass is exactly 1.
    pub fn from_weights(breakpoints: Vec<Rational>, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidValuation(
                "one weight per block required".into(),
            ));
        }
        let total: Rational = weights.iter().fold(Rational::zero(), |a, w| a + w);
        if total <= Rational::zero() {
            return Err(Error::InvalidValuation("weights sum to zero".into()));
        }
        let densities = breakpoints
            .windows(2)
            .zip(&weights)
            .map(|(w, weight)| weight / (&total * (&w[1] - &w[0])))
            .collect();
        Valuation::new(breakpoints, densities)
    }

    /// `weights.len()` equal-width blocks with mass proportional to the
    /// integer weights.
    pub fn from_block_weights(weights: &[u64]) -> Result<Self> {
        let blocks = weights.len() as i64;
        let total: u64 = weights.iter().sum();
        if blocks == 0 || total == 0 {
            return Err(Error::InvalidValuation("need a positive weight".into()));
        }
        let total = total as i64;
        let mut cumulative = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0i64;
        cumulative.push(Rational::zero());
        for &w in weights {
            acc += w as i64;
            cumulative.push(rat(acc, total));
        }
        Ok(Valuation {
            breakpoints: (0..=blocks).map(|i| rat(i, blocks)).collect(),
            densities: weights.iter().map(|&w| rat(w as i64 * blocks, total)).collect(),
            cumulative,
        })
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[Rational] {
        &self.densities
    }

    /// Mass of `[0, x]`.
    pub fn cdf(&self, x: &Rational) -> Rational {
        let segments = self.densities.len();
        let seg = self
            .breakpoints
            .partition_point(|b| b <= x)
            .saturating_sub(1)
            .min(segments - 1);
        let offset = x - &self.breakpoints[seg];
        if self.densities[seg].is_zero() || offset.is_zero() {
            return self.cumulative[seg].clone();
        }
        &self.cumulative[seg] + &self.densities[seg] * offset
    }

    /// Smallest `x` with `cdf(x) >= target`, for `target <= 1`.
    pub fn inverse_cdf(&self, target: &Rational) -> Rational {
        let j = self.cumulative.partition_point(|c| c < target);
        if j == 0 {
            return Rational::zero();
        }
        let seg = j - 1;
        // cumulative[seg] < target <= cumulative[seg + 1], so the density is positive.
        &self.breakpoints[seg] + (target - &self.cumulative[seg]) / &self.densities[seg]
    }

    pub fn interval_value(&self, iv: &Interval) -> Rational {
        if iv.is_degenerate() {
            return Rational::zero();
        }
        self.cdf(iv.hi()) - self.cdf(iv.lo())
    }
}

/// Exact value of a piece set. Ground truth for certification; never counted
/// as a query.
pub fn measure(v: &Valuation, s: &PieceSet) -> Rational {
    s.fragments()
        .iter()
        .fold(Rational::zero(), |acc, iv| acc + v.interval_value(iv))
}

/// `n` players with their valuations. Players with identical valuations share
/// one allocation.
#[derive(Clone, Debug)]
pub struct Instance {
    valuations: Vec<Arc<Valuation>>,
}

impl Instance {
    pub fn new(valuations: Vec<Arc<Valuation>>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::InvalidInstance("need at least one player".into()));
        }
        Ok(Instance { valuations })
    }

    pub fn from_valuations(valuations: Vec<Valuation>) -> Result<Self> {
        Instance::new(valuations.into_iter().map(Arc::new).collect())
    }

    /// `n` players sharing a single valuation.
    pub fn identical(n: usize, v: Valuation) -> Result<Self> {
        let shared = Arc::new(v);
        Instance::new(vec![shared; n])
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> {
        0..self.valuations.len()
    }

    pub fn valuation(&self, p: PlayerId) -> &Valuation {
        &self.valuations[p]
    }

    pub(crate) fn shared_valuation(&self, p: PlayerId) -> &Arc<Valuation> {
        &self.valuations[p]
    }

    pub fn value(&self, p: PlayerId, s: &PieceSet) -> Rational {
        measure(&self.valuations[p], s)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            n: self.n(),
            players: self
                .valuations
                .iter()
                .map(|v| PlayerRecord {
                    breakpoints: v.breakpoints.clone(),
                    densities: v.densities.clone(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        if file.n != file.players.len() {
            return Err(Error::InvalidInstance(format!(
                "declared n = {} but {} players listed",
                file.n,
                file.players.len()
            )));
        }
        let mut seen: HashMap<Valuation, Arc<Valuation>> = HashMap::new();
        let mut valuations = Vec::with_capacity(file.n);
        for (i, rec) in file.players.into_iter().enumerate() {
            let v = Valuation::new(rec.breakpoints, rec.densities).map_err(|e| {
                Error::InvalidInstance(format!("player {i}: {e}"))
            })?;
            let shared = seen.entry(v.clone()).or_insert_with(|| Arc::new(v)).clone();
            valuations.push(shared);
        }
        Instance::new(valuations)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Instance::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// On-disk instance layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub players: Vec<PlayerRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlayerRecord {
    #[serde(with = "serde_rational_vec")]
    pub breakpoints: Vec<Rational>,
    #[serde(with = "serde_rational_vec")]
    pub densities: Vec<Rational>,
}
