//! Exact failure bounds of the approximate-fair contract.

use subcake::protocols::approx_fair::simplified_failure_bound;
use subcake::protocols::failure_bound;
use subcake::rational::{int, to_f64};

fn main() {
    for c in [33, 64, 128, 256, 1024] {
        let b = failure_bound(&int(c)).expect("c > 32");
        println!("c={c:>5}: bound = {b} ~ {:.6}, 2^9/c^2 = {}", to_f64(&b), simplified_failure_bound(&int(c)));
    }
    println!("c=32: {:?}", failure_bound(&int(32)));
}
