//! Generates planted-program tasks and reports how many the builtin pipeline
//! recovers on the first attempt.
//!
//! Usage: `cargo run --release --example planted -- [COUNT] [SEED]`

use std::time::Instant;

use arcsym::harness::{run_task, Config, Endpoints};
use arcsym::synth::{planted_suite, SynthConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2024);

    let start = Instant::now();
    let suite = planted_suite(seed, count, &SynthConfig::default());
    println!("generated {count} task(s) in {:.2?}", start.elapsed());

    let start = Instant::now();
    let mut recovered = 0;
    for planted in &suite {
        let outcome = run_task(&planted.task, &Config::default(), &Endpoints::default()).expect("valid config");
        if outcome.solved_first_attempt() == Some(true) {
            recovered += 1;
        } else {
            let selected = outcome.analysis.report.selected.as_ref().map(|p| p.canonical());
            println!("miss {}: planted {} selected {selected:?}", planted.task.task_id, planted.program.canonical());
        }
    }
    println!("recovered {recovered}/{count} in {:.2?}", start.elapsed());
}
