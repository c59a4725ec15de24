//! The `nielsen` binary end to end: exit codes, reports and machine blocks.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use nielsen::report::parse_machine_block;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

fn nielsen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nielsen")).args(args).output().expect("binary runs")
}

fn nielsen_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_nielsen"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn circle_has_two_classes() {
    let o = nielsen(&["classes", config("circle.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = parse_machine_block(&stdout(&o)).unwrap();
    assert_eq!(m.finite, Some(true));
    assert_eq!(m.class_count, Some(2));
    let ks: Vec<_> = m.classes.iter().map(|c| c.k.clone()).collect();
    assert_eq!(ks, vec![vec![0], vec![1]]);
}

#[test]
fn identical_torus_maps_have_infinitely_many_classes() {
    let o = nielsen(&["classes", config("torus_identical.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("infinite"));
    assert_eq!(parse_machine_block(&stdout(&o)).unwrap().finite, Some(false));
}

#[test]
fn malformed_glide_is_a_config_error_with_field_path() {
    let o = nielsen(&["classes", config("malformed_glide.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("target.D"), "{}", stderr(&o));
}

#[test]
fn six_point_torus_index_from_stdin() {
    let text = std::fs::read_to_string(config("torus_six.toml")).unwrap();
    let o = nielsen_stdin(&["index"], &text);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let m = parse_machine_block(&out).unwrap();
    let index = m.index.unwrap();
    assert_eq!((index.z, index.z2), (6, 0));
    assert_eq!(m.points.len(), 6);
    // the table rows agree with the block
    assert_eq!(out.lines().filter(|l| l.starts_with('(') && l.ends_with("(1, 0)")).count(), 6);
    // the same from an explicit "-" path
    assert_eq!(parse_machine_block(&stdout(&nielsen_stdin(&["index", "-"], &text))), Some(m));
}

#[test]
fn empty_region_gives_zero() {
    let text = std::fs::read_to_string(config("torus_six.toml")).unwrap() + "\n[region]\nboxes = []\n";
    let o = nielsen_stdin(&["index"], &text);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = parse_machine_block(&stdout(&o)).unwrap();
    let index = m.index.unwrap();
    assert_eq!((index.z, index.z2), (0, 0));
}

#[test]
fn singular_pair_needs_regularize() {
    let path = config("singular.toml");
    let o = nielsen(&["index", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("singular pair"), "{}", stderr(&o));
    let o = nielsen(&["trace", "--regularize", "--seed", "5", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = parse_machine_block(&stdout(&o)).unwrap();
    assert_eq!(m.regularized, Some(true));
    assert_eq!(m.index.unwrap().z, 0);
}

#[test]
fn trace_of_circle_and_epsilon_line() {
    let o = nielsen(&["trace", config("circle.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("epsilon(trace) = (2, 0), index = (2, 0) [ok]"), "{out}");
    let m = parse_machine_block(&out).unwrap();
    assert_eq!(m.nielsen_count, Some(2));
    assert!(m.classes.iter().all(|c| c.coefficient.as_deref() == Some("1")));
}

#[test]
fn exact_numeric_and_tolerance_flags() {
    let path = config("torus_six.toml");
    let exact = nielsen(&["index", "--exact", path.to_str().unwrap()]);
    let numeric = nielsen(&["index", "--numeric", "--tol", "1e-12", path.to_str().unwrap()]);
    let (a, b) = (parse_machine_block(&stdout(&exact)).unwrap(), parse_machine_block(&stdout(&numeric)).unwrap());
    assert_eq!(a.index, b.index);
    for (p, q) in a.points.iter().zip(&b.points) {
        assert!(p.x.iter().zip(&q.x).all(|(u, v)| (u - v).abs() < 1e-9));
    }
    assert_eq!(nielsen(&["index", "--exact", "--numeric", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn domain_marker_changes_degenerate_reading() {
    let path = config("klein_fold.toml");
    let full = parse_machine_block(&stdout(&nielsen(&["index", path.to_str().unwrap()]))).unwrap();
    assert_eq!(full.index.map(|i| (i.z, i.z2)), Some((0, 1)));
    // a chart around the point near (1/24, 1/4); the region still holds three points but only
    // the one inside the chart is counted
    let o = nielsen(&["index", "--domain-marker", "0,7/32:3/32,9/32", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let chart = parse_machine_block(&stdout(&o)).unwrap();
    assert_eq!(chart.points.len(), 1);
    assert!(!chart.points[0].degenerate);
    assert_eq!(chart.index.unwrap().z.abs(), 1);
    assert_eq!(nielsen(&["index", "--domain-marker", "0,1:2", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn missing_file_and_bad_toml_exit_two() {
    assert_eq!(nielsen(&["index", "/nonexistent/problem.toml"]).status.code(), Some(2));
    let o = nielsen_stdin(&["trace"], "[source]\nkind = \"torus\"\ndim = \n");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn verify_axioms_exit_codes() {
    let dir = std::env::temp_dir().join(format!("nielsen-cli-{}", std::process::id()));
    let out = dir.to_str().unwrap();
    let ok = nielsen(&["verify-axioms", "--trials", "10", "--out", out]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(!dir.exists());

    let empty = nielsen(&["verify-axioms", "--trials", "0", "--out", out]);
    assert_eq!(empty.status.code(), Some(0));

    let bug = nielsen(&["verify-axioms", "--trials", "10", "--check", "swap", "--inject-sign-bug", "--out", out]);
    assert_eq!(bug.status.code(), Some(1));
    let files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!files.is_empty());
    // every counterexample replays through the CLI
    for f in &files {
        let o = nielsen(&["index", f.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", f.display(), stderr(&o));
    }
    std::fs::remove_dir_all(&dir).unwrap();

    assert_eq!(nielsen(&["verify-axioms", "--check", "nonsense"]).status.code(), Some(2));
}
