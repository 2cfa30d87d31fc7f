//! Designated players secure deposit pieces by repeated condensing; the rest
//! of the cake goes to the non-victim survivors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subcake::designated::{run_theorem2, DesignatedParams};
use subcake::harness::{generate, AdversarialProfile, GeneratorKind, GeneratorSpec};
use subcake::rational::{inv_e_lower, rat};

fn main() -> subcake::Result<()> {
    let n = 3000;
    let kind = GeneratorKind::Adversarial { profile: AdversarialProfile::ConcentratedPrefix { count: 3 } };
    let instance = generate(&GeneratorSpec { kind, n, seed: 0 })?;
    let params = DesignatedParams::new(n, vec![0, 1, 2], inv_e_lower(), rat(1, 1), rat(1, 64))?;
    println!(
        "eps'={} samples/round={} max rounds={} approver threshold={:.1}",
        params.eps_prime(),
        params.samples_per_round(),
        params.max_rounds(),
        params.approver_threshold()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let out = run_theorem2(&instance, &params, &mut rng)?;
    for (d, polite) in out.preassign.deposits.iter().zip(&out.polite) {
        println!(
            "player {}: deposit {} after {} rounds ({} condense calls, {:?}), polite={polite}",
            d.player, d.piece, d.rounds, d.condense_calls, d.exit
        );
    }
    println!("relation graph components: {:?}", out.preassign.graph.components);
    println!(
        "disjoint={} floor certificate={} victims={}/{} survivors fair={} queries={}",
        out.designated_disjoint(),
        out.designated_floor_certificate.all_fair(),
        out.victims.len(),
        out.expected_victims(),
        out.survivor_certificate.all_fair(),
        out.ledger.total()
    );
    Ok(())
}
