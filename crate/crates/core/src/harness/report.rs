//! Per-trial reports, batch summaries and their CSV/TSV forms.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::oracle::QueryLedger;
use crate::protocols::FairnessCertificate;
use crate::rational::format_rational;
use crate::undesignated::PREASSIGN_PHASE;

use super::generate::GeneratorSpec;

/// Parameters a trial ran with. Rationals are stored in canonical text form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fragments: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub designated: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub checked: usize,
    pub fair: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_value: Option<String>,
}

impl CertificateSummary {
    pub fn of(certs: &[&FairnessCertificate]) -> Self {
        let checked = certs.iter().map(|c| c.rows.len()).sum();
        let fair = certs.iter().map(|c| c.fair_count()).sum();
        let min_value = certs.iter().filter_map(|c| c.min_value()).min().map(format_rational);
        CertificateSummary { checked, fair, min_value }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialFlags {
    pub loop_exhausted: bool,
    pub charge_duplicates: bool,
    pub degenerate_completion: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub scenario: String,
    pub kind: String,
    pub trial: u64,
    /// Seed of the batch; the trial uses stream `trial` of it.
    pub seed: u64,
    pub params: ParamsEcho,
    pub status: String,
    pub success: bool,
    pub ledger: QueryLedger,
    pub total_queries: u64,
    pub certificate: CertificateSummary,
    pub victims: usize,
    pub expected_victims: usize,
    pub flags: TrialFlags,
    /// Properties that must hold in every trial, by name.
    pub checks: BTreeMap<String, bool>,
    /// Off unless requested, so that reports replay byte for byte.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl TrialReport {
    pub fn preassign_queries(&self) -> u64 {
        self.ledger.phase(PREASSIGN_PHASE).total()
    }

    /// Queries charged outside the preassign phase.
    pub fn other_queries(&self) -> u64 {
        self.total_queries - self.preassign_queries()
    }

    pub fn all_checks_hold(&self) -> bool {
        self.checks.values().all(|&b| b)
    }

    /// Total equals the sum over phases.
    pub fn is_conserved(&self) -> bool {
        self.ledger.phases().values().map(|c| c.total()).sum::<u64>() == self.total_queries
    }
}

/// One CSV row per scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub n: usize,
    pub r: String,
    pub eps: String,
    pub t: String,
    pub sigma: String,
    pub trials: u64,
    pub success_rate: f64,
    pub floor: f64,
    pub preassign_queries_mean: f64,
    pub completion_queries_mean: f64,
    pub victims_mean: f64,
}

impl SummaryRow {
    pub fn from_reports(scenario: &str, floor: f64, reports: &[TrialReport]) -> Self {
        let trials = reports.len() as u64;
        let mean = |f: &dyn Fn(&TrialReport) -> f64| {
            if reports.is_empty() {
                0.0
            } else {
                reports.iter().map(f).sum::<f64>() / reports.len() as f64
            }
        };
        let first = reports.first();
        let echo = |f: &dyn Fn(&ParamsEcho) -> Option<String>| {
            first.and_then(|r| f(&r.params)).unwrap_or_default()
        };
        SummaryRow {
            scenario: scenario.to_owned(),
            n: first.map_or(0, |r| r.params.n),
            r: echo(&|p| p.r.map(|r| r.to_string())),
            eps: echo(&|p| p.eps.clone()),
            t: echo(&|p| p.t.clone()),
            sigma: echo(&|p| p.sigma.clone()),
            trials,
            success_rate: mean(&|r| r.success as u8 as f64),
            floor,
            preassign_queries_mean: mean(&|r| r.preassign_queries() as f64),
            completion_queries_mean: mean(&|r| r.other_queries() as f64),
            victims_mean: mean(&|r| r.victims as f64),
        }
    }
}

pub const CSV_COLUMNS: [&str; 12] = [
    "scenario",
    "n",
    "r",
    "eps",
    "t",
    "sigma",
    "trials",
    "success_rate",
    "floor",
    "preassign_queries_mean",
    "completion_queries_mean",
    "victims_mean",
];

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: std::io::Read>(input: R) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Plot data: one line per scenario with `x = n`.
pub fn write_plot_tsv<W: Write>(rows: &[SummaryRow], mut out: W) -> Result<()> {
    writeln!(out, "scenario\tx\tsuccess_rate\tpreassign_queries_mean\tcompletion_queries_mean")?;
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.scenario, r.n, r.success_rate, r.preassign_queries_mean, r.completion_queries_mean
        )?;
    }
    Ok(())
}

pub fn reports_to_json(reports: &[TrialReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}
