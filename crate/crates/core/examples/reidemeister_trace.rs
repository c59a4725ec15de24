//! Reidemeister trace: the index split by coincidence class, and the Nielsen count.
//!
//!     cargo run --example reidemeister_trace

use nielsen::axiom_harness::cancelling_circle;
use nielsen::instances::circle_pair;
use nielsen::invariants::{evaluate, Problem};
use nielsen::orientation_system::OrientationChoice;
use nielsen::{OpenRegion, Q};

fn show(label: &str, p: &Problem) {
    let e = evaluate(p).unwrap();
    println!("{label}");
    for (rep, c) in e.trace.entries() {
        println!("  class {rep}: {c}");
    }
    let hit: std::collections::BTreeSet<_> = e.records.iter().map(|r| &r.class_rep).collect();
    println!(
        "  epsilon = {}, {} points in {} classes, Nielsen count {}",
        e.trace.epsilon(),
        e.records.len(),
        hit.len(),
        e.trace.nielsen_count()
    );
}

fn main() {
    let (f, g) = circle_pair(3, 1);
    for sign in [1, -1] {
        let mut p = Problem::new(f.clone(), g.clone(), OpenRegion::Full);
        p.orientation = OrientationChoice::global(sign);
        show(&format!("3x vs x, orientation {sign:+}"), &p);
    }

    // a pair of opposite points in one class cancels in the trace
    let rho = Q::new(1, 8);
    let (f, g) = cancelling_circle(rho, rho / Q::from(2));
    show("constant vs 1/16 + sin(2 pi x)/8", &Problem::new(f, g, OpenRegion::Full));
}
