//! Monte-Carlo check of the sampling bound: `ceil(t r / eps)` draws with
//! replacement from `n` elements hit at least `r` distinct members of a fixed
//! `floor(eps n)`-subset with probability at least
//! `1 - s^2 / (((s-1)(t-1) - 1)^2 r)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{ceil_to_u64, floor_to_u64, format_rational, int, serde_rational, to_f64, Rational};
use crate::rng::trial_rng;

use super::stats::RateCheck;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingLemmaParams {
    pub n: u64,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    #[serde(with = "serde_rational")]
    pub s: Rational,
    #[serde(with = "serde_rational")]
    pub t: Rational,
    pub r: u64,
}

impl SamplingLemmaParams {
    /// Requires `n >= 1`, `0 < eps <= 1`, `(s-1)(t-1) > 1` and `r s <= eps n`.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.eps <= int(0) || self.eps > int(1) {
            return bad(format!("eps = {} must lie in (0, 1]", format_rational(&self.eps)));
        }
        if (&self.s - int(1)) * (&self.t - int(1)) <= int(1) {
            return bad("(s - 1)(t - 1) must exceed 1".into());
        }
        if int(self.r as i64) * &self.s > &self.eps * int(self.n as i64) {
            return bad(format!("r = {} exceeds eps n / s", self.r));
        }
        Ok(())
    }

    pub fn draws(&self) -> u64 {
        ceil_to_u64(&(&self.t * int(self.r as i64) / &self.eps))
    }

    pub fn subset_size(&self) -> u64 {
        floor_to_u64(&(&self.eps * int(self.n as i64)))
    }

    /// `1 - s^2 / (((s-1)(t-1) - 1)^2 r)`, exact; `1` when `r = 0`.
    pub fn bound(&self) -> Rational {
        if self.r == 0 {
            return int(1);
        }
        let slack = (&self.s - int(1)) * (&self.t - int(1)) - int(1);
        int(1) - &self.s * &self.s / (&slack * &slack * int(self.r as i64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Result {
    pub params: SamplingLemmaParams,
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub check: RateCheck,
}

/// One trial: whether the draws hit at least `r` distinct subset members.
/// The subset is `{0, .., floor(eps n) - 1}`.
pub fn sampling_trial<R: Rng + ?Sized>(params: &SamplingLemmaParams, rng: &mut R) -> bool {
    if params.r == 0 {
        return true;
    }
    let subset = params.subset_size();
    let mut hit = std::collections::HashSet::new();
    for _ in 0..params.draws() {
        let x = rng.random_range(0..params.n);
        if x < subset && hit.insert(x) && hit.len() as u64 >= params.r {
            return true;
        }
    }
    false
}

/// Runs `trials` independent trials from `seed` and compares the success
/// frequency with the bound minus three binomial standard deviations.
pub fn check_lemma1(params: &SamplingLemmaParams, trials: u64, seed: u64) -> Result<Lemma1Result> {
    params.validate()?;
    let successes = (0..trials)
        .filter(|&i| sampling_trial(params, &mut trial_rng(seed, i)))
        .count() as u64;
    let bound = params.bound();
    Ok(Lemma1Result {
        params: params.clone(),
        check: RateCheck::new(successes, trials, to_f64(&bound)),
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn example() -> SamplingLemmaParams {
        SamplingLemmaParams { n: 127_000, eps: rat(1, 5), s: int(127), t: int(2), r: 200 }
    }

    #[test]
    fn example_bound() {
        let p = example();
        assert!(p.validate().is_ok());
        assert_eq!(p.bound(), int(1) - rat(127 * 127, 125 * 125 * 200));
        assert!((to_f64(&p.bound()) - 0.99484).abs() < 1e-5);
        assert_eq!(p.draws(), 2000);
        assert_eq!(p.subset_size(), 25_400);
    }

    #[test]
    fn zero_r_always_succeeds() {
        let p = SamplingLemmaParams { r: 0, ..example() };
        let res = check_lemma1(&p, 50, 1).unwrap();
        assert_eq!(res.check.successes, 50);
        assert_eq!(res.check.rate, 1.0);
    }

    #[test]
    fn constraints_are_checked() {
        assert!(SamplingLemmaParams { s: int(2), t: int(2), ..example() }.validate().is_err());
        assert!(SamplingLemmaParams { r: 201, ..example() }.validate().is_err());
        assert!(SamplingLemmaParams { eps: int(0), ..example() }.validate().is_err());
        assert!(SamplingLemmaParams { n: 0, ..example() }.validate().is_err());
    }

    #[test]
    fn whole_set_subset() {
        let p = SamplingLemmaParams { n: 1000, eps: int(1), s: int(10), t: int(3), r: 100 };
        let res = check_lemma1(&p, 200, 5).unwrap();
        assert!(res.check.passed);
        assert_eq!(res.check.rate, 1.0);
    }
}
