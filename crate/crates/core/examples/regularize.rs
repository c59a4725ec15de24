//! Singular pairs are perturbed to regular ones by a certified admissible homotopy.
//!
//!     cargo run --example regularize -- 7

use nielsen::coincidence_solver::SolverOptions;
use nielsen::homotopy::regularize;
use nielsen::instances::circle_pair;
use nielsen::invariants::{evaluate, Problem};
use nielsen::OpenRegion;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    // equal degrees: the coincidence set of x ↦ 2x and x ↦ 2x is the whole circle
    let (f, g) = circle_pair(2, 2);
    let plain = Problem::new(f.clone(), g.clone(), OpenRegion::Full);
    match evaluate(&plain) {
        Ok(e) => println!("unexpectedly regular: {}", e.index),
        Err(e) => println!("without regularization: {e}"),
    }

    let r = regularize(&f, &g, &OpenRegion::Full, seed, SolverOptions::default()).unwrap();
    println!("after {} attempt(s): g = {}", r.attempts, r.g);
    println!("homotopy margin on g: {:.3e}", r.homotopy_g.margin());

    let mut p = plain;
    p.regularize_seed = Some(seed);
    let e = evaluate(&p).unwrap();
    println!("index after regularization: {} ({} points)", e.index, e.records.len());
}
