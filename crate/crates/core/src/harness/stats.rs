//! Finite-sample slack for comparing empirical rates with probability floors.

use serde::{Deserialize, Serialize};

/// Standard deviation of the success frequency over `trials` Bernoulli trials
/// with success probability `p` (clamped to `[0, 1]`).
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// An empirical frequency checked against `floor - 3 sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub floor: f64,
    pub sigma: f64,
    pub passed: bool,
}

impl RateCheck {
    pub fn new(successes: u64, trials: u64, floor: f64) -> Self {
        let rate = if trials == 0 { 1.0 } else { successes as f64 / trials as f64 };
        let sigma = binomial_sigma(floor, trials);
        RateCheck {
            successes,
            trials,
            rate,
            floor,
            sigma,
            passed: rate >= floor - 3.0 * sigma,
        }
    }

    /// `floor - 3 sigma`.
    pub fn threshold(&self) -> f64 {
        self.floor - 3.0 * self.sigma
    }
}
