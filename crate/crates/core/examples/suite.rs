//! Runs a small scenario suite, writes its artifacts, and checks replay.

use subcake::harness::{run_suite, SuiteConfig};

const CONFIG: &str = r#"{
  "master_seed": 7,
  "scenarios": [
    {"name": "dc-small", "kind": "dc", "generator": {"kind": {"type": "block_random", "blocks": 8}, "n": 16, "seed": 1}, "trials": 5, "fragments": 2},
    {"name": "t1-small", "kind": "theorem1", "generator": {"kind": {"type": "uniform"}, "n": 2540, "seed": 2}, "trials": 10, "r": 2, "eps": "1/10", "t": "2"},
    {"name": "lemma1", "kind": "lemma1", "n": 127000, "eps": "1/5", "s": "127", "t": "2", "r": 200, "trials": 200}
  ]
}"#;

fn main() -> subcake::Result<()> {
    let config: SuiteConfig = serde_json::from_str(CONFIG).expect("valid config");
    let outcome = run_suite(&config)?;
    for row in &outcome.summaries {
        println!("{:<9} n={:<6} trials={:<4} rate={:.3} floor={:.3}", row.scenario, row.n, row.trials, row.success_rate, row.floor);
    }
    for a in &outcome.assertions {
        println!("[{}] {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.scenario, a.description);
    }
    let dir = std::env::temp_dir().join("subcake-suite");
    outcome.write(&dir, true)?;
    println!("artifacts in {}", dir.display());
    let again = run_suite(&config)?;
    println!("replay byte-identical: {}", again.reports_json()? == outcome.reports_json()?);
    Ok(())
}
