//! Monte-Carlo frequency of drawing at least `r` distinct members of a fixed
//! `floor(eps n)`-subset, against the closed-form bound.

use subcake::harness::{check_lemma1, SamplingLemmaParams};
use subcake::rational::{rat, to_f64};

fn main() -> subcake::Result<()> {
    let params = SamplingLemmaParams { n: 127_000, eps: rat(1, 5), s: rat(127, 1), t: rat(2, 1), r: 200 };
    let result = check_lemma1(&params, 1000, 2024)?;
    println!("draws per trial: {}", params.draws());
    println!("bound: {} ~ {:.5}", result.bound, to_f64(&result.bound));
    println!(
        "empirical: {}/{} = {:.4}, threshold (bound - 3 sigma) = {:.4}, passed = {}",
        result.check.successes,
        result.check.trials,
        result.check.rate,
        result.check.threshold(),
        result.check.passed
    );
    Ok(())
}
