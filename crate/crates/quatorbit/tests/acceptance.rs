//! Runs the twelve acceptance criteria at full sample counts and prints one
//! line per criterion. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use quatorbit::check::{run_criterion, SuiteConfig};

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let start = Instant::now();
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = (1..=12u8)
            .map(|id| {
                let cfg = &cfg;
                s.spawn(move || {
                    let t = Instant::now();
                    (run_criterion(id, cfg).expect("known criterion"), t.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    println!("acceptance suite: n = {}, seed = {}", cfg.n, cfg.seed);
    for (r, took) in &results {
        println!("{r} [{:.1}s]", took.as_secs_f64());
    }
    let failed = results.iter().filter(|(r, _)| !r.passed).count();
    println!(
        "acceptance: {} passed, {} failed in {:.1}s",
        results.len() - failed,
        failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
