use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use subcake::harness::report::{reports_to_json, SummaryRow};
use subcake::harness::trials::lemma1_batch;
use subcake::harness::{
    assess_batch, generate, run_suite, Assertion, BatchSettings, DcBatch, GeneratorSpec, InstanceSource,
    SamplingLemmaParams, SuiteConfig, Theorem1Batch, Theorem2Batch, TrialReport,
};
use subcake::rational::{parse_rational, to_f64};
use subcake::{Instance, Rational};

#[derive(Parser)]
#[command(name = "subcake", version, about = "Proportional cake cutting with victims in the Robertson-Webb model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Undesignated preassignment followed by completion.
    Theorem1 {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        #[arg(long, value_parser = rational)]
        t: Rational,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Charge one cut per draw, repeated players included.
        #[arg(long)]
        charge_duplicates: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Designated preassignment followed by completion.
    Theorem2 {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated player ids.
        #[arg(long, value_delimiter = ',', required = true)]
        designated: Vec<usize>,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        #[arg(long, value_parser = rational)]
        t: Rational,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = rational, default_value = "1")]
        scale: Rational,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Divide and conquer among all players.
    Dc {
        #[arg(long)]
        instance: PathBuf,
        /// Divide a cake made of this many equal fragments.
        #[arg(long, default_value_t = 1)]
        fragments: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo check of the distinct-sampling bound.
    Lemma1 {
        #[arg(long)]
        n: u64,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        #[arg(long, value_parser = rational)]
        s: Rational,
        #[arg(long, value_parser = rational)]
        t: Rational,
        #[arg(long)]
        r: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a JSON suite config; writes report.json and summary.csv.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Also write plot.tsv.
        #[arg(long)]
        plot: bool,
    },
    /// Writes the instance described by a generator spec (JSON).
    Generate {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Path) -> Result<Arc<Instance>> {
    Ok(Arc::new(Instance::load(path).with_context(|| format!("loading {}", path.display()))?))
}

fn settings(name: &str, seed: u64, trials: u64) -> BatchSettings {
    BatchSettings { scenario: name.into(), seed, trials, record_wall_time: false }
}

/// Writes the reports, prints the summary and assertions, and returns whether
/// every assertion held.
fn finish(name: &str, floor: f64, reports: &[TrialReport], out: Option<&PathBuf>) -> Result<bool> {
    if let Some(out) = out {
        std::fs::write(out, reports_to_json(reports)?).with_context(|| format!("writing {}", out.display()))?;
    }
    let row = SummaryRow::from_reports(name, floor, reports);
    println!(
        "{name}: n={} trials={} success_rate={:.4} floor={:.4} preassign_queries_mean={:.1} completion_queries_mean={:.1} victims_mean={:.1}",
        row.n, row.trials, row.success_rate, row.floor, row.preassign_queries_mean, row.completion_queries_mean, row.victims_mean
    );
    Ok(print_assertions(&assess_batch(name, floor, reports)))
}

fn print_assertions(assertions: &[Assertion]) -> bool {
    for a in assertions {
        println!("  [{}] {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.scenario, a.description);
    }
    assertions.iter().all(|a| a.passed)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Theorem1 { instance, r, eps, t, seed, trials, charge_duplicates, out } => {
            let batch = Theorem1Batch { source: InstanceSource::Fixed(load(&instance)?), r, eps, t, charge_duplicates };
            let reports = batch.run(&settings("theorem1", seed, trials))?;
            finish("theorem1", batch.floor(), &reports, Some(&out))
        }
        Command::Theorem2 { instance, designated, eps, t, seed, scale, trials, out } => {
            let batch = Theorem2Batch { source: InstanceSource::Fixed(load(&instance)?), designated, eps, t, scale };
            let reports = batch.run(&settings("theorem2", seed, trials))?;
            finish("theorem2", batch.floor(), &reports, Some(&out))
        }
        Command::Dc { instance, fragments, out } => {
            let batch = DcBatch { source: InstanceSource::Fixed(load(&instance)?), fragments };
            let reports = batch.run(&settings("dc", 0, 1))?;
            finish("dc", 1.0, &reports, Some(&out))
        }
        Command::Lemma1 { n, eps, s, t, r, trials, seed, out } => {
            let params = SamplingLemmaParams { n, eps, s, t, r };
            let reports = lemma1_batch(&params, &settings("lemma1", seed, trials))?;
            finish("lemma1", to_f64(&params.bound()), &reports, out.as_ref())
        }
        Command::Suite { config, out_dir, plot } => {
            let cfg = SuiteConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            let outcome = run_suite(&cfg)?;
            outcome.write(&out_dir, plot)?;
            for row in &outcome.summaries {
                println!(
                    "{}: n={} trials={} success_rate={:.4} floor={:.4}",
                    row.scenario, row.n, row.trials, row.success_rate, row.floor
                );
            }
            Ok(print_assertions(&outcome.assertions))
        }
        Command::Generate { spec, out } => {
            let spec: GeneratorSpec = serde_json::from_str(&spec).context("parsing generator spec")?;
            generate(&spec)?.save(&out)?;
            println!("wrote {} players to {}", spec.n, out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
