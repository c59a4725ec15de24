//! Orientation choices: flipping the orientation negates the integer part, and swapping the
//! maps multiplies the index by `(−1)^n` once the orientation is carried along.
//!
//!     cargo run --example orientation

use nielsen::instances::torus_pair;
use nielsen::invariants::{evaluate, Problem};
use nielsen::orientation_system::{swapped_orientation, OrientationChoice};
use nielsen::twisted_conjugacy::TwistedPair;
use nielsen::{OpenRegion, Q};

fn main() {
    for (a, b) in [
        (vec![vec![2]], vec![vec![-1]]),
        (vec![vec![1, 1], vec![0, 2]], vec![vec![0, 1], vec![3, 0]]),
        (vec![vec![1, 0, 0], vec![0, 2, 0], vec![1, 0, 1]], vec![vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]]),
    ] {
        let n = a.len();
        let (f, g) = torus_pair(&a, &b, vec![Q::new(1, 8); n], vec![Q::from(0); n]).unwrap();
        let o = OrientationChoice::global(1);
        let mut p = Problem::new(f.clone(), g.clone(), OpenRegion::Full);
        p.orientation = o.clone();
        let fg = evaluate(&p).unwrap();
        p.orientation = o.negate();
        let flipped = evaluate(&p).unwrap();

        let swapped_pair = TwistedPair::new(g.hom(), f.hom()).unwrap();
        let mut q = Problem::new(g, f, OpenRegion::Full);
        q.orientation = swapped_orientation(&o, &fg.records, &swapped_pair);
        let gf = evaluate(&q).unwrap();
        println!("n = {n}: index(f,g) = {}, with -O: {}, index(g,f) = {}", fg.index, flipped.index, gf.index);
    }
}
