//! Runs the bundled task matrix and prints a comparison table.
//!
//! cargo run --release -p cogx-core --example sweep [trials] [reasoners...]
//!
//! SEARCH_LAMBDA and AFFINITY_DECAY override the reasoning defaults.

use std::time::Instant;

use cogx_core::harness::trials::{compare_reasoners, format_comparison, Suite};
use cogx_core::reasoning::ReasonerKind;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut suite = Suite::bundled();
    if let Some(n) = args.first() {
        suite.trials = n.parse().expect("trials is an integer");
    }
    if args.len() > 1 {
        suite.reasoners = args[1..].iter().map(|s| s.parse::<ReasonerKind>().expect("reasoner name")).collect();
    }
    let t0 = Instant::now();
    let (rows, results) = compare_reasoners(&suite, true, &|cfg| {
        let env_f64 = |k: &str| std::env::var(k).ok().map(|v| v.parse::<f64>().expect("numeric override"));
        if let Some(v) = env_f64("SEARCH_LAMBDA") {
            cfg.params.reasoning.search_lambda = v;
        }
        if let Some(v) = env_f64("AFFINITY_DECAY") {
            cfg.params.reasoning.affinity_decay = v;
        }
    }).expect("suite runs");
    print!("{}", format_comparison(&rows));
    for r in results.iter().filter(|r| !r.success && r.reasoner != ReasonerKind::Vefep) {
        println!("timeout: {} {} {} seed {} coverage {:.2} searched {:.2}", r.env, r.task, r.reasoner.as_str(), r.seed, r.coverage, r.search_coverage);
    }
    println!("{} episodes in {:.1}s", results.len(), t0.elapsed().as_secs_f64());
}
