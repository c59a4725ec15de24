//! Reidemeister classes of circle maps `x ↦ a x` against `x ↦ b x`.
//!
//! There are `|b − a|` classes when `a ≠ b` and infinitely many when the degrees agree.
//!
//!     cargo run --example circle_classes -- 3 1

use nielsen::instances::circle_pair;
use nielsen::twisted_conjugacy::TwistedPair;

fn main() {
    let args: Vec<i64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (a, b) = match args[..] {
        [a, b] => (a, b),
        _ => (3, 1),
    };
    let (f, g) = circle_pair(a, b);
    let pair = TwistedPair::new(f.hom(), g.hom()).expect("circle homs");
    let classes = pair.classes();
    println!("f = {a}x, g = {b}x on the circle");
    match classes.count() {
        Some(n) => {
            println!("{n} Reidemeister classes");
            for rep in &classes.representatives {
                println!("  {rep}");
            }
        }
        None => println!("infinitely many Reidemeister classes"),
    }

    // twisted conjugacy by hand: k ~ k + (b − a) m
    let (x, y) = (nielsen::DeckElement::translation(vec![0]), nielsen::DeckElement::translation(vec![b - a]));
    match pair.same_class(&y, &x) {
        Some(w) => println!("{y} = g#({w}) {x} f#({w})^-1"),
        None => println!("{x} and {y} are in different classes"),
    }
}
