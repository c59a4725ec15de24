//! Degenerate coincidences: the Klein bottle folded onto the torus.
//!
//! Every coincidence is degenerate, so the index only counts them mod 2. Read inside a chart
//! the same point is an ordinary ±1 point, which is why the domain marker matters.
//!
//!     cargo run --example klein_degenerate

use nielsen::instances::KleinFold;
use nielsen::invariants::{evaluate, Problem};
use nielsen::{DomainMarker, OpenRegion, Q};

fn main() {
    let fam = KleinFold::new(Q::new(1, 10), Q::new(1, 20));
    let (f, g) = (fam.f(), fam.g());
    println!("f = {f}\ng = {g}");

    for (label, region) in [
        ("whole manifold", OpenRegion::Full),
        ("two points", KleinFold::pair_region()),
        ("three points", fam.triple_region()),
    ] {
        let e = evaluate(&Problem::new(f.clone(), g.clone(), region)).unwrap();
        println!("{label:>15}: {} points, index {}", e.records.len(), e.index);
    }

    let region = OpenRegion::Boxes(vec![fam.chart_box()]);
    let mut p = Problem::new(f, g, region);
    let in_k = evaluate(&p).unwrap();
    p.domain = DomainMarker::Chart(fam.chart_box());
    let in_chart = evaluate(&p).unwrap();
    println!("one point, read in K: {}, read in a chart: {}", in_k.index, in_chart.index);
}
