//! Generates instances from JSON specs and round-trips them through files.

use subcake::harness::{generate, GeneratorSpec};
use subcake::{Instance, PieceSet};

fn main() -> subcake::Result<()> {
    let specs = [
        r#"{"kind":{"type":"uniform"},"n":4,"seed":0}"#,
        r#"{"kind":{"type":"spike_cluster","lo":"9/10","hi":"1","fraction":"1/2"},"n":4,"seed":1}"#,
        r#"{"kind":{"type":"block_random","blocks":4},"n":4,"seed":2}"#,
        r#"{"kind":{"type":"adversarial","profile":{"type":"disjoint_groups","groups":2}},"n":4,"seed":3}"#,
    ];
    let dir = std::env::temp_dir().join("subcake-instance-io");
    std::fs::create_dir_all(&dir)?;
    for (i, text) in specs.iter().enumerate() {
        let spec: GeneratorSpec = serde_json::from_str(text).expect("valid spec");
        let instance = generate(&spec)?;
        let path = dir.join(format!("instance{i}.json"));
        instance.save(&path)?;
        let back = Instance::load(&path)?;
        let halves: Vec<String> = back
            .players()
            .map(|p| back.valuation(p).inverse_cdf(&subcake::rat(1, 2)).to_string())
            .collect();
        println!(
            "{}: round trip equal={} whole-cake value of player 0={} half-value points={halves:?}",
            path.display(),
            back.to_json()? == instance.to_json()?,
            back.value(0, &PieceSet::unit())
        );
    }
    Ok(())
}
