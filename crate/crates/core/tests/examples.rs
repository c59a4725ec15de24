//! Every example program runs to completion.

use std::path::PathBuf;
use std::process::Command;

fn examples_dir() -> PathBuf {
    // target/<profile>/deps/<this test> → target/<profile>/examples
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().join("examples")
}

fn run(name: &str, args: &[&str]) -> String {
    let path = examples_dir().join(name);
    let out = Command::new(&path)
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn examples_run() {
    assert!(run("circle_classes", &["3", "1"]).contains("2 Reidemeister classes"));
    assert!(run("circle_classes", &["2", "2"]).contains("infinitely many"));
    assert!(run("torus_index", &[]).contains("det(B - A) = -4, index = (-4, 0)"));
    let k = run("klein_degenerate", &[]);
    assert!(k.contains("three points: 3 points, index (0, 1)"));
    assert!(k.contains("read in K: (0, 1), read in a chart: (1, 0)"));
    assert!(run("regularize", &["3"]).contains("index after regularization: (0, 0)"));
    assert!(run("reidemeister_trace", &[]).contains("2 points in 1 classes, Nielsen count 0"));
    let o = run("orientation", &[]);
    assert!(o.contains("n = 1: index(f,g) = (-3, 0), with -O: (3, 0), index(g,f) = (3, 0)"));
    assert!(o.contains("n = 2: index(f,g) = (2, 0), with -O: (-2, 0), index(g,f) = (2, 0)"));
    assert!(run("config_files", &["examples/configs/torus_six.toml"]).contains("index (z, z2) = (6, 0)"));
    let suite = run("axiom_suite", &["3"]);
    assert!(suite.contains("sign-bug engine") && suite.contains("FAIL"));
}
