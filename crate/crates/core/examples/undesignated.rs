//! Preassign fair pieces to `r` sampled players with a query count that does
//! not depend on `n`, then complete with `floor(eps n)` victims.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subcake::harness::{generate, GeneratorKind, GeneratorSpec};
use subcake::protocols::DcAdapter;
use subcake::rational::rat;
use subcake::undesignated::{run_theorem1, success_floor, UndesignatedOptions, UndesignatedParams};

fn main() -> subcake::Result<()> {
    let (r, eps, t) = (10, rat(1, 10), rat(2, 1));
    for n in [12_700, 25_400] {
        let kind = GeneratorKind::Mixture { lo: rat(9, 10), hi: rat(1, 1), fraction: rat(1, 5), blocks: 4, profiles: 64 };
        let instance = generate(&GeneratorSpec { kind, n, seed: 3 })?;
        let params = UndesignatedParams::new(n, r, eps.clone(), t.clone())?;
        let options = UndesignatedOptions { verify_premises: true, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let out = run_theorem1(&instance, &params, &DcAdapter, options, &mut rng)?;
        let pre = out.ledger.phase("preassign");
        let comp = out.ledger.phase("completion");
        println!(
            "n={n}: draws={} success={} victims={}/{} cut_point={} preassign queries={} completion queries={}",
            params.draws(),
            out.is_success(),
            out.victims.len(),
            out.expected_victims(),
            out.cut_point.as_ref().map(|x| x.to_string()).unwrap_or_default(),
            pre.total(),
            comp.total(),
        );
    }
    println!("guaranteed success floor: {:.3}", success_floor(&t, r, &eps, 0.0));
    Ok(())
}
