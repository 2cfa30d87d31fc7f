//! Seeded instance generators.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, rat, serde_rational, Rational};
use crate::rng::master_rng;
use crate::valuation::{Instance, Valuation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Density 1 for everybody.
    Uniform,
    /// The first `ceil(fraction n)` players put all their mass uniformly on
    /// `[lo, hi]`; the others are uniform.
    SpikeCluster {
        #[serde(with = "serde_rational")]
        lo: Rational,
        #[serde(with = "serde_rational")]
        hi: Rational,
        #[serde(with = "serde_rational")]
        fraction: Rational,
    },
    /// Random integer weights in `0..=8` on `blocks` equal blocks. With
    /// `profiles > 0` only that many distinct valuations are drawn and
    /// players take them round robin; `0` draws one per player.
    BlockRandom {
        blocks: usize,
        #[serde(default)]
        profiles: usize,
    },
    /// A spike cluster on `[lo, hi]` for a `fraction` of the players (chosen
    /// at random), block-random profiles for the rest.
    Mixture {
        #[serde(with = "serde_rational")]
        lo: Rational,
        #[serde(with = "serde_rational")]
        hi: Rational,
        #[serde(with = "serde_rational")]
        fraction: Rational,
        blocks: usize,
        #[serde(default)]
        profiles: usize,
    },
    Adversarial { profile: AdversarialProfile },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdversarialProfile {
    /// Player `i` is uniform on block `i mod groups` of `groups` equal blocks.
    DisjointGroups { groups: usize },
    /// Players `0..count` are uniform on pairwise disjoint intervals
    /// `[i/count, (2i+1)/(2 count)]`; everybody else is uniform on the cake.
    ConcentratedPrefix { count: usize },
    /// Density alternates between 0 and 2 over `2 teeth` blocks; odd players
    /// use the shifted pattern, so the two halves of the population want
    /// complementary pieces.
    Zigzag { teeth: usize },
}

fn unit_blocks(blocks: usize) -> Vec<Rational> {
    (0..=blocks).map(|i| rat(i as i64, blocks as i64)).collect()
}

fn concentrated(lo: &Rational, hi: &Rational) -> Result<Valuation> {
    let zero = int(0);
    let one = int(1);
    let mut bps = Vec::new();
    let mut weights = Vec::new();
    if *lo > zero {
        bps.push(zero.clone());
        weights.push(zero.clone());
    }
    bps.push(lo.clone());
    weights.push(one.clone());
    bps.push(hi.clone());
    if *hi < one {
        weights.push(zero);
        bps.push(one);
    }
    Valuation::from_weights(bps, weights)
}

fn block_random<R: Rng>(rng: &mut R, blocks: usize) -> Result<Valuation> {
    let mut weights: Vec<u64> = (0..blocks).map(|_| rng.random_range(0..=8)).collect();
    if weights.iter().all(|&w| w == 0) {
        let i = rng.random_range(0..blocks);
        weights[i] = 1;
    }
    Valuation::from_block_weights(&weights)
}

fn block_random_pool<R: Rng>(rng: &mut R, n: usize, blocks: usize, profiles: usize) -> Result<Vec<Arc<Valuation>>> {
    if blocks == 0 {
        return Err(Error::InvalidGenerator("blocks must be positive".into()));
    }
    if profiles == 0 {
        return (0..n).map(|_| block_random(rng, blocks).map(Arc::new)).collect();
    }
    let pool = (0..profiles)
        .map(|_| block_random(rng, blocks).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..n).map(|i| pool[i % profiles].clone()).collect())
}

fn check_region(lo: &Rational, hi: &Rational, fraction: &Rational) -> Result<()> {
    if !(int(0) <= *lo && lo < hi && *hi <= int(1)) {
        return Err(Error::InvalidGenerator("spike region must satisfy 0 <= lo < hi <= 1".into()));
    }
    if *fraction < int(0) || *fraction > int(1) {
        return Err(Error::InvalidGenerator("fraction must lie in [0, 1]".into()));
    }
    Ok(())
}

fn spike_count(fraction: &Rational, n: usize) -> usize {
    usize::try_from((fraction * int(n as i64)).ceil()).unwrap_or(n)
}

/// Builds the instance described by `spec`; the same spec always yields the
/// same instance.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InvalidGenerator("n must be positive".into()));
    }
    let mut rng = master_rng(spec.seed);
    let valuations: Vec<Arc<Valuation>> = match &spec.kind {
        GeneratorKind::Uniform => {
            let flat = Arc::new(Valuation::uniform());
            (0..n).map(|_| flat.clone()).collect()
        }
        GeneratorKind::SpikeCluster { lo, hi, fraction } => {
            check_region(lo, hi, fraction)?;
            let spike = Arc::new(concentrated(lo, hi)?);
            let flat = Arc::new(Valuation::uniform());
            let k = spike_count(fraction, n);
            (0..n).map(|i| if i < k { spike.clone() } else { flat.clone() }).collect()
        }
        GeneratorKind::BlockRandom { blocks, profiles } => block_random_pool(&mut rng, n, *blocks, *profiles)?,
        GeneratorKind::Mixture { lo, hi, fraction, blocks, profiles } => {
            check_region(lo, hi, fraction)?;
            let spike = Arc::new(concentrated(lo, hi)?);
            let mut vals = block_random_pool(&mut rng, n, *blocks, *profiles)?;
            let k = spike_count(fraction, n);
            for i in rand::seq::index::sample(&mut rng, n, k) {
                vals[i] = spike.clone();
            }
            vals
        }
        GeneratorKind::Adversarial { profile } => adversarial(profile, n)?,
    };
    Instance::new(valuations)
}

fn adversarial(profile: &AdversarialProfile, n: usize) -> Result<Vec<Arc<Valuation>>> {
    match *profile {
        AdversarialProfile::DisjointGroups { groups } => {
            if groups == 0 {
                return Err(Error::InvalidGenerator("groups must be positive".into()));
            }
            let g = groups as i64;
            let pool = (0..g)
                .map(|i| concentrated(&rat(i, g), &rat(i + 1, g)).map(Arc::new))
                .collect::<Result<Vec<_>>>()?;
            Ok((0..n).map(|i| pool[i % groups].clone()).collect())
        }
        AdversarialProfile::ConcentratedPrefix { count } => {
            if count == 0 || count > n {
                return Err(Error::InvalidGenerator("count must lie in 1..=n".into()));
            }
            let c = count as i64;
            let flat = Arc::new(Valuation::uniform());
            let mut vals = vec![flat; n];
            for (i, slot) in vals.iter_mut().take(count).enumerate() {
                let i = i as i64;
                *slot = Arc::new(concentrated(&rat(i, c), &rat(2 * i + 1, 2 * c))?);
            }
            Ok(vals)
        }
        AdversarialProfile::Zigzag { teeth } => {
            if teeth == 0 {
                return Err(Error::InvalidGenerator("teeth must be positive".into()));
            }
            let bps = unit_blocks(2 * teeth);
            let even = (0..2 * teeth).map(|b| int(((b + 1) % 2) as i64)).collect();
            let odd = (0..2 * teeth).map(|b| int((b % 2) as i64)).collect();
            let a = Arc::new(Valuation::from_weights(bps.clone(), even)?);
            let b = Arc::new(Valuation::from_weights(bps, odd)?);
            Ok((0..n).map(|i| if i % 2 == 0 { a.clone() } else { b.clone() }).collect())
        }
    }
}
