//! Per-instance solver times on random covers of a complete graph.
//!
//! Usage: `cargo run --release --example solver_timing -- <n> <k> <trials> [seed]`

use std::time::Instant;

use dpcover::graph::complete;
use dpcover::transversal::find_transversal;
use dpcover::{sample_cover, Seed};

fn main() {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("numeric argument"))
        .collect();
    let [n, k, trials, rest @ ..] = args.as_slice() else {
        eprintln!("usage: solver_timing <n> <k> <trials> [seed]");
        std::process::exit(1);
    };
    let seed = Seed(rest.first().copied().unwrap_or(0));
    let g = complete(*n as usize).expect("graph");
    for i in 0..*trials {
        let start = Instant::now();
        let cover = sample_cover(&g, *k as usize, seed.derive(i)).expect("cover");
        let colorable = find_transversal(&cover).is_some();
        println!("trial {i}: colorable={colorable} {:.3}s", start.elapsed().as_secs_f64());
    }
}
