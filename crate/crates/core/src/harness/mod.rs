//! Generators, Monte-Carlo trial batches, statistical checks and reports.

pub mod generate;
pub mod lemma1;
pub mod report;
pub mod stats;
pub mod suite;
pub mod trials;

pub use generate::{generate, AdversarialProfile, GeneratorKind, GeneratorSpec};
pub use lemma1::{check_lemma1, Lemma1Result, SamplingLemmaParams};
pub use report::{SummaryRow, TrialReport};
pub use stats::{binomial_sigma, RateCheck};
pub use suite::{assess_batch, run_suite, Assertion, Scenario, ScenarioSpec, SuiteConfig, SuiteOutcome};
pub use trials::{BatchSettings, DcBatch, InstanceSource, Theorem1Batch, Theorem2Batch};
