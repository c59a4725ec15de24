//! Problem configs: parse, evaluate, print the report, and read the machine block back.
//!
//!     cargo run --example config_files -- crates/core/examples/configs/torus_six.toml

use nielsen::config::ProblemConfig;
use nielsen::invariants::evaluate;
use nielsen::report::{index_report, parse_machine_block};

const DEFAULT: &str = include_str!("configs/klein_fold.toml");

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable config"),
        None => DEFAULT.to_string(),
    };
    let config = ProblemConfig::from_toml(&text).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2);
    });
    let canonical = config.to_toml();
    assert_eq!(ProblemConfig::from_toml(&canonical).unwrap(), config);
    println!("canonical form:\n{canonical}");

    let p = config.problem();
    let e = evaluate(&p).unwrap();
    let (table, machine) = index_report(&e, &p.orientation);
    let full = format!("{table}{}", machine.to_block());
    print!("{full}");
    assert_eq!(parse_machine_block(&full), Some(machine));
}
