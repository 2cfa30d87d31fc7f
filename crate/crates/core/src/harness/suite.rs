//! JSON-configured scenario suites.
//!
//! Every scenario yields trial reports, one summary row and a list of
//! assertions: the empirical success rate against its floor with 3-sigma
//! slack, and per-trial checks that must hold in every trial.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::protocols::failure_bound;
use crate::rational::{format_rational, int, serde_rational, to_f64, Rational};
use crate::rng::child_seed;

use super::generate::GeneratorSpec;
use super::lemma1::SamplingLemmaParams;
use super::report::{reports_to_json, write_plot_tsv, write_summary_csv, ParamsEcho, SummaryRow, TrialReport};
use super::stats::RateCheck;
use super::trials::{lemma1_batch, BatchSettings, DcBatch, InstanceSource, Theorem1Batch, Theorem2Batch};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub master_seed: u64,
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub scenarios: Vec<Scenario>,
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(flatten)]
    pub spec: ScenarioSpec,
}

fn default_one() -> Rational {
    int(1)
}

fn default_fragments() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSpec {
    Theorem1 {
        generator: GeneratorSpec,
        r: usize,
        #[serde(with = "serde_rational")]
        eps: Rational,
        #[serde(with = "serde_rational")]
        t: Rational,
        trials: u64,
        #[serde(default)]
        charge_duplicates: bool,
    },
    Theorem2 {
        generator: GeneratorSpec,
        designated: Vec<usize>,
        #[serde(with = "serde_rational")]
        eps: Rational,
        #[serde(with = "serde_rational")]
        t: Rational,
        #[serde(with = "serde_rational", default = "default_one")]
        scale: Rational,
        trials: u64,
    },
    Dc {
        generator: GeneratorSpec,
        #[serde(default = "default_fragments")]
        fragments: usize,
        trials: u64,
    },
    Lemma1 {
        n: u64,
        #[serde(with = "serde_rational")]
        eps: Rational,
        #[serde(with = "serde_rational")]
        s: Rational,
        #[serde(with = "serde_rational")]
        t: Rational,
        r: u64,
        trials: u64,
    },
    /// Exact evaluation of the approximate-fair failure bound at factor `c`,
    /// asserted to lie below `below`.
    FailureBound {
        #[serde(with = "serde_rational")]
        c: Rational,
        #[serde(with = "serde_rational")]
        below: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub scenario: String,
    pub description: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub reports: Vec<TrialReport>,
    pub summaries: Vec<SummaryRow>,
    pub assertions: Vec<Assertion>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    pub fn reports_json(&self) -> Result<String> {
        reports_to_json(&self.reports)
    }

    /// Writes `report.json`, `summary.csv` and, if requested, `plot.tsv`.
    pub fn write(&self, dir: &Path, plot: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.reports_json()?)?;
        write_summary_csv(&self.summaries, std::fs::File::create(dir.join("summary.csv"))?)?;
        if plot {
            write_plot_tsv(&self.summaries, std::fs::File::create(dir.join("plot.tsv"))?)?;
        }
        Ok(())
    }
}

/// The success-rate assertion plus one assertion per per-trial check.
pub fn assess_batch(name: &str, floor: f64, reports: &[TrialReport]) -> Vec<Assertion> {
    let mut assertions = Vec::new();
    let successes = reports.iter().filter(|r| r.success).count() as u64;
    let check = RateCheck::new(successes, reports.len() as u64, floor);
    assertions.push(Assertion {
        scenario: name.to_owned(),
        description: format!(
            "success rate {:.4} >= floor {:.4} - 3 sigma = {:.4}",
            check.rate,
            check.floor,
            check.threshold()
        ),
        passed: check.passed,
    });
    let mut names: Vec<&String> = reports.iter().flat_map(|r| r.checks.keys()).collect();
    names.sort();
    names.dedup();
    for check in names {
        let failing = reports.iter().filter(|r| r.checks.get(check) == Some(&false)).count();
        assertions.push(Assertion {
            scenario: name.to_owned(),
            description: format!("{check} holds in every trial ({failing} failing)"),
            passed: failing == 0,
        });
    }
    assertions
}

/// Runs every scenario in order. Scenario `i` uses the child seed
/// `(master_seed, i)`.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut outcome = SuiteOutcome { reports: Vec::new(), summaries: Vec::new(), assertions: Vec::new() };
    for (idx, scenario) in config.scenarios.iter().enumerate() {
        let settings = |trials: u64| BatchSettings {
            scenario: scenario.name.clone(),
            seed: child_seed(config.master_seed, idx as u64),
            trials,
            record_wall_time: config.record_wall_time,
        };
        let (floor, reports) = match &scenario.spec {
            ScenarioSpec::Theorem1 { generator, r, eps, t, trials, charge_duplicates } => {
                let batch = Theorem1Batch {
                    source: InstanceSource::Generated(generator.clone()),
                    r: *r,
                    eps: eps.clone(),
                    t: t.clone(),
                    charge_duplicates: *charge_duplicates,
                };
                (batch.floor(), batch.run(&settings(*trials))?)
            }
            ScenarioSpec::Theorem2 { generator, designated, eps, t, scale, trials } => {
                let batch = Theorem2Batch {
                    source: InstanceSource::Generated(generator.clone()),
                    designated: designated.clone(),
                    eps: eps.clone(),
                    t: t.clone(),
                    scale: scale.clone(),
                };
                (batch.floor(), batch.run(&settings(*trials))?)
            }
            ScenarioSpec::Dc { generator, fragments, trials } => {
                let batch = DcBatch { source: InstanceSource::Generated(generator.clone()), fragments: *fragments };
                (1.0, batch.run(&settings(*trials))?)
            }
            ScenarioSpec::Lemma1 { n, eps, s, t, r, trials } => {
                let params = SamplingLemmaParams { n: *n, eps: eps.clone(), s: s.clone(), t: t.clone(), r: *r };
                (to_f64(&params.bound()), lemma1_batch(&params, &settings(*trials))?)
            }
            ScenarioSpec::FailureBound { c, below } => {
                let bound = failure_bound(c);
                let holds = bound.as_ref().is_some_and(|b| b < below);
                let mut report = super::trials::single_report(
                    &settings(1),
                    "failure_bound",
                    ParamsEcho { c: Some(format_rational(c)), ..Default::default() },
                );
                report.success = holds;
                report.status = match &bound {
                    Some(b) => format!("failure_bound={}", format_rational(b)),
                    None => "undefined".into(),
                };
                report.checks.insert("bound_below".into(), holds);
                (1.0, vec![report])
            }
        };
        outcome.assertions.extend(assess_batch(&scenario.name, floor, &reports));
        outcome.summaries.push(SummaryRow::from_reports(&scenario.name, floor, &reports));
        outcome.reports.extend(reports);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::GeneratorKind;
    use crate::rational::rat;

    fn small_config() -> SuiteConfig {
        SuiteConfig {
            master_seed: 11,
            record_wall_time: false,
            scenarios: vec![
                Scenario {
                    name: "t1".into(),
                    spec: ScenarioSpec::Theorem1 {
                        generator: GeneratorSpec { kind: GeneratorKind::BlockRandom { blocks: 4, profiles: 0 }, n: 1270, seed: 3 },
                        r: 1,
                        eps: rat(1, 10),
                        t: int(2),
                        trials: 3,
                        charge_duplicates: false,
                    },
                },
                Scenario {
                    name: "dc".into(),
                    spec: ScenarioSpec::Dc {
                        generator: GeneratorSpec { kind: GeneratorKind::BlockRandom { blocks: 4, profiles: 0 }, n: 9, seed: 1 },
                        fragments: 3,
                        trials: 4,
                    },
                },
                Scenario {
                    name: "l1".into(),
                    spec: ScenarioSpec::Lemma1 { n: 1000, eps: rat(1, 5), s: int(10), t: int(3), r: 10, trials: 20 },
                },
                Scenario { name: "p1".into(), spec: ScenarioSpec::FailureBound { c: int(128), below: rat(1, 64) } },
            ],
        }
    }

    #[test]
    fn empty_suite_passes() {
        let out = run_suite(&SuiteConfig { master_seed: 0, record_wall_time: false, scenarios: vec![] }).unwrap();
        assert!(out.reports.is_empty() && out.summaries.is_empty() && out.all_passed());
        assert_eq!(out.reports_json().unwrap(), "[]");
    }

    #[test]
    fn small_suite_replays_exactly() {
        let cfg = small_config();
        let a = run_suite(&cfg).unwrap();
        let b = run_suite(&cfg).unwrap();
        assert_eq!(a.reports_json().unwrap(), b.reports_json().unwrap());
        assert_eq!(a.summaries.len(), 4);
        assert_eq!(a.reports.len(), 3 + 4 + 20 + 1);
        assert!(a.all_passed(), "{:?}", a.failures().collect::<Vec<_>>());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = small_config();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<SuiteConfig>(&text).unwrap(), cfg);
        let minimal = r#"{"master_seed": 1, "scenarios": [
            {"name": "p", "kind": "failure_bound", "c": 64, "below": "1/8"},
            {"name": "d", "kind": "theorem2", "generator": {"kind": {"type": "uniform"}, "n": 50},
             "designated": [0], "eps": "1/5", "t": 1, "trials": 1}
        ]}"#;
        let cfg: SuiteConfig = serde_json::from_str(minimal).unwrap();
        assert_eq!(cfg.scenarios.len(), 2);
        match &cfg.scenarios[1].spec {
            ScenarioSpec::Theorem2 { scale, .. } => assert_eq!(*scale, int(1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn failing_assertion_is_reported() {
        let cfg = SuiteConfig {
            master_seed: 0,
            record_wall_time: false,
            scenarios: vec![Scenario { name: "p".into(), spec: ScenarioSpec::FailureBound { c: int(16), below: int(1) } }],
        };
        let out = run_suite(&cfg).unwrap();
        assert!(!out.all_passed());
    }
}
