//! Runs the randomized axiom checks, then the same checks against an engine with a sign
//! error, which they must catch.
//!
//!     cargo run --example axiom_suite -- 20

use nielsen::axiom_harness::{run_all, SignBugEngine, StandardEngine, DEFAULT_SEED};

fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    println!("standard engine, seed {DEFAULT_SEED}, {trials} trials");
    for r in run_all(&StandardEngine, DEFAULT_SEED, trials) {
        println!("  {}", r.summary_line());
    }
    println!("sign-bug engine");
    for r in run_all(&SignBugEngine, DEFAULT_SEED, trials) {
        println!("  {}", r.summary_line());
        if let Some(f) = r.failures.first() {
            println!("      first failure, trial {}: {} ({} vs {})", f.trial, f.what, f.left, f.right);
        }
    }
}
