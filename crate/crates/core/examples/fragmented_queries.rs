//! Cut and Eval queries on contiguous and fragmented pieces, with the ledger
//! charging one query per fragment touched.

use subcake::rational::{int, rat};
use subcake::{Instance, Interval, Oracle, PieceSet, Valuation};

fn main() -> subcake::Result<()> {
    // Player 0 is uniform; player 1 puts 3/4 of its mass on [1/2, 1].
    let skewed = Valuation::from_weights(vec![int(0), rat(1, 2), int(1)], vec![rat(1, 4), rat(3, 4)])?;
    let instance = Instance::from_valuations(vec![Valuation::uniform(), skewed])?;
    let mut oracle = Oracle::new(&instance);

    oracle.set_phase("contiguous");
    let whole = Interval::unit();
    for p in instance.players() {
        let half = oracle.cut(&whole, p, &rat(1, 2))?;
        println!("player {p}: half-value cut of [0,1] at {:?}", half.point().map(|x| x.to_string()));
    }

    oracle.set_phase("fragmented");
    let piece = PieceSet::new(vec![
        Interval::new(int(0), rat(1, 4))?,
        Interval::new(rat(1, 2), rat(5, 8))?,
        Interval::new(rat(3, 4), int(1))?,
    ])?;
    let value = oracle.eval_piece(&piece, 1)?;
    let cut = oracle.cut_piece(&piece, 1, &(&value / int(2)))?;
    println!("player 1 values the 3-fragment piece at {value}; its midpoint cut is {:?}", cut.point().map(|x| x.to_string()));

    for (phase, counts) in oracle.ledger().phases() {
        println!("{phase:>11}: {} cuts, {} evals", counts.cut, counts.eval);
    }
    println!("total queries: {}", oracle.ledger().total());
    Ok(())
}
