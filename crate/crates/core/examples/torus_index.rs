//! Coincidence index of affine torus maps: the total index is `det(B − A)` and every class
//! carries exactly one point.
//!
//!     cargo run --example torus_index

use nielsen::instances::torus_pair;
use nielsen::invariants::{evaluate, Problem};
use nielsen::orientation_system::OrientationChoice;
use nielsen::{OpenRegion, Q};

fn main() {
    let a = vec![vec![1, 2], vec![0, 1]];
    let b = vec![vec![3, 0], vec![1, -2]];
    let (f, g) = torus_pair(&a, &b, vec![Q::new(1, 4), Q::from(0)], vec![Q::from(0), Q::new(1, 3)]).unwrap();
    let mut p = Problem::new(f, g, OpenRegion::Full);
    p.orientation = OrientationChoice::global(1);
    let e = evaluate(&p).unwrap();

    println!("A = {a:?}, B = {b:?}");
    for r in &e.records {
        println!("  x = {:?}  class {}  sign {:+}", r.point.to_f64(), r.class_rep, r.lift_sign);
    }
    let d = (b[0][0] - a[0][0]) * (b[1][1] - a[1][1]) - (b[0][1] - a[0][1]) * (b[1][0] - a[1][0]);
    println!("det(B - A) = {d}, index = {}, semi-index = {}", e.index, e.semi_index());

    // the same pair restricted to a box sees only part of the points
    let half = OpenRegion::Boxes(vec![nielsen::OpenBox::new(
        vec![Q::new(-1, 64), Q::new(-1, 64)],
        vec![Q::new(63, 128), Q::new(63, 64)],
    )
    .unwrap()]);
    p.region = half;
    println!("on [-1/64, 63/128) x [-1/64, 63/64): index = {}", evaluate(&p).unwrap().index);
}
