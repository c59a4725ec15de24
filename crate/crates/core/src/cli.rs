//! The `nielsen` command line.
//!
//! Every command reads one problem config (a file path, or standard input when the path is
//! omitted or `-`) and prints a table followed by a fenced machine block. Exit status is 0 on
//! success, 1 when the computation fails and 2 when the input or the flags are invalid.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::axiom_harness::{self, Engine, SignBugEngine, StandardEngine, DEFAULT_SEED, DEFAULT_TRIALS};
use crate::coincidence_solver::SolverMode;
use crate::config::{parse_domain_marker, ProblemConfig};
use crate::error::{Error, Result};
use crate::invariants::{evaluate, Problem};
use crate::report::{classes_report, index_report, trace_report};
use crate::twisted_conjugacy::TwistedPair;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nielsen", version, about = "Coincidence index, Reidemeister trace and semi-index on flat manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the Reidemeister classes of the pair of induced homomorphisms.
    Classes(InputArgs),
    /// Total coincidence index over the region, with a per-point table.
    Index(SolveArgs),
    /// Reidemeister trace: the index split by coincidence class.
    Trace(SolveArgs),
    /// Run the randomized axiom checks.
    VerifyAxioms(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Problem config; standard input when omitted or `-`.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Force the exact rational solver.
    #[arg(long, conflicts_with = "numeric")]
    pub exact: bool,
    /// Force the subdivision and Newton solver.
    #[arg(long)]
    pub numeric: bool,
    /// Newton residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Regularize a singular pair by a small certified perturbation first.
    #[arg(long)]
    pub regularize: bool,
    /// Seed for `--regularize`.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// `full`, or a chart box `lo1,lo2:hi1,hi2`; overrides the config.
    #[arg(long)]
    pub domain_marker: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Directory for counterexample configs.
    #[arg(long, default_value = "counterexamples")]
    pub out: PathBuf,
    /// Run only the named checks.
    #[arg(long = "check")]
    pub checks: Vec<String>,
    /// Negative control: evaluate with a sign error built in.
    #[arg(long, hide = true)]
    pub inject_sign_bug: bool,
}

fn read_input(input: &InputArgs, stdin: &mut dyn Read) -> Result<String> {
    let mut text = String::new();
    match &input.input {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p).map_err(|e| Error::config(p.display().to_string(), e.to_string()))?;
        }
        _ => {
            stdin
                .read_to_string(&mut text)
                .map_err(|e| Error::config("<stdin>", e.to_string()))?;
        }
    }
    Ok(text)
}

fn load(input: &InputArgs, stdin: &mut dyn Read) -> Result<ProblemConfig> {
    ProblemConfig::from_toml(&read_input(input, stdin)?)
}

fn build_problem(args: &SolveArgs, stdin: &mut dyn Read) -> Result<Problem> {
    let config = load(&args.input, stdin)?;
    let mut p = config.problem();
    if args.exact {
        p.solver.mode = SolverMode::Exact;
    } else if args.numeric {
        p.solver.mode = SolverMode::Numeric;
    }
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::config("--tol", "must be a positive number"));
        }
        p.solver.tol = tol;
    }
    if let Some(d) = &args.domain_marker {
        p.domain = parse_domain_marker(d)?;
    }
    if args.regularize {
        p.regularize_seed = Some(args.seed);
    }
    Ok(p)
}

fn cmd_classes(args: &InputArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<()> {
    let c = load(args, stdin)?;
    let set = TwistedPair::new(c.f.hom(), c.g.hom())?.classes();
    let (table, m) = classes_report(&set);
    let _ = write!(out, "{table}{}", m.to_block());
    Ok(())
}

fn cmd_index(args: &SolveArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<()> {
    let p = build_problem(args, stdin)?;
    let e = evaluate(&p)?;
    let (table, m) = index_report(&e, &p.orientation);
    let _ = write!(out, "{table}{}", m.to_block());
    Ok(())
}

fn cmd_trace(args: &SolveArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> Result<()> {
    let p = build_problem(args, stdin)?;
    let e = evaluate(&p)?;
    let pair = TwistedPair::new(e.f.hom(), e.g.hom())?;
    let (table, m) = trace_report(&e, |rep| pair.is_degenerate(rep));
    let _ = write!(out, "{table}{}", m.to_block());
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<bool> {
    let engine: &dyn Engine = if args.inject_sign_bug { &SignBugEngine } else { &StandardEngine };
    for name in &args.checks {
        if !axiom_harness::CHECKS.iter().any(|(n, _)| n == name) {
            let known: Vec<&str> = axiom_harness::CHECKS.iter().map(|(n, _)| *n).collect();
            return Err(Error::config("--check", format!("unknown check `{name}` (known: {})", known.join(", "))));
        }
    }
    let _ = writeln!(out, "seed {} trials {} engine {}", args.seed, args.trials, engine.name());
    if args.trials == 0 {
        let _ = writeln!(out, "no trials requested");
        return Ok(true);
    }
    let reports: Vec<_> = axiom_harness::CHECKS
        .iter()
        .filter(|(n, _)| args.checks.is_empty() || args.checks.iter().any(|c| c == n))
        .map(|(_, check)| check(engine, args.seed, args.trials))
        .collect();
    for r in &reports {
        let _ = writeln!(out, "{}", r.summary_line());
        for f in r.failures.iter().take(3) {
            let _ = writeln!(out, "    trial {}: {}: {} vs {}", f.trial, f.what, f.left, f.right);
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let written = axiom_harness::write_counterexamples(&reports, &args.out)
        .map_err(|e| Error::config(args.out.display().to_string(), e.to_string()))?;
    if !written.is_empty() {
        let _ = writeln!(out, "{} counterexample file(s) in {}", written.len(), args.out.display());
    }
    let _ = writeln!(out, "{} of {} checks passed", reports.len() - failed, reports.len());
    Ok(failed == 0)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Classes(a) => cmd_classes(a, stdin, out).map(|_| true),
        Command::Index(a) => cmd_index(a, stdin, out).map(|_| true),
        Command::Trace(a) => cmd_trace(a, stdin, out).map(|_| true),
        Command::VerifyAxioms(a) => cmd_verify(a, out),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_COMPUTATION,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_config_error() {
                EXIT_CONFIG
            } else {
                EXIT_COMPUTATION
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str], input: &str) -> (i32, String, String) {
        let mut stdin = input.as_bytes();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("nielsen").chain(args.iter().copied()), &mut stdin, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    const CIRCLE: &str = "[source]\nkind = \"torus\"\ndim = 1\n[target]\nkind = \"torus\"\ndim = 1\n[f]\nmatrix = [[3]]\n[g]\nmatrix = [[1]]\n";

    #[test]
    fn exact_and_numeric_conflict() {
        let (code, _, err) = call(&["index", "--exact", "--numeric"], CIRCLE);
        assert_eq!(code, EXIT_CONFIG, "{err}");
    }

    #[test]
    fn trials_zero_is_empty_success() {
        let (code, out, _) = call(&["verify-axioms", "--trials", "0"], "");
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("no trials"));
    }

    #[test]
    fn bad_tolerance_is_config_error() {
        let (code, _, err) = call(&["index", "--tol=0"], CIRCLE);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("--tol"));
    }
}
