//! Proportional division of the whole cake and of a fragmented cake, with
//! exact certificates and the query bound.

use subcake::harness::trials::fragmented_cake;
use subcake::harness::{generate, GeneratorKind, GeneratorSpec};
use subcake::protocols::{dc, dc_query_bound, fair_threshold};
use subcake::{Oracle, PieceSet};

fn main() -> subcake::Result<()> {
    let n = 24;
    let spec = GeneratorSpec { kind: GeneratorKind::BlockRandom { blocks: 8, profiles: 0 }, n, seed: 11 };
    let instance = generate(&spec)?;
    let players: Vec<_> = instance.players().collect();

    for fragments in [1, 3] {
        let cake = if fragments == 1 { PieceSet::unit() } else { fragmented_cake(fragments)? };
        let mut oracle = Oracle::new(&instance);
        let allocation = dc(&mut oracle, &players, &cake)?;
        let worst = players
            .iter()
            .map(|&p| instance.value(p, allocation.get(p).unwrap()) / instance.value(p, &cake))
            .min()
            .unwrap();
        let cert = allocation.certify(&instance, &fair_threshold(n));
        println!(
            "{fragments} fragment(s): disjoint={} worst relative share={worst} (>= 1/{n}) queries={} bound={}",
            allocation.is_pairwise_disjoint(),
            oracle.ledger().total(),
            fragments as u64 * dc_query_bound(n),
        );
        if fragments == 1 {
            println!("  all players fair against 1/n: {}", cert.all_fair());
        }
    }
    Ok(())
}
