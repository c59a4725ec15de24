//! Randomized, seeded checks of the index axioms and their corollaries.
//!
//! Each check draws its instances from a ChaCha stream keyed by `(seed, trial)`, so any
//! single trial can be replayed. A failed comparison carries the instance as a TOML problem
//! config that the CLI accepts directly.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coincidence_solver::CoincidenceRecord;
use crate::config::ProblemConfig;
use crate::equivariant_map::{EquivariantLift, InducedHom, TrigTerm};
use crate::error::Result;
use crate::flat_space::{DeckElement, DomainMarker, FlatManifold, OpenBox, OpenRegion};
use crate::generators::{det_of, perturb, random_klein_pair, random_torus_pair};
use crate::homotopy::certify_homotopy;
use crate::instances::KleinFold;
use crate::invariants::{
    evaluate, index_from_records, semi_index, trace_from_records, Coefficient, Evaluation, IndexValue,
    Problem,
};
use crate::orientation_system::{sign_of_embedding, swapped_orientation, transport_through_homotopy, OrientationChoice};
use crate::rational::{dyadic, QMat, QVec, Q};
use crate::twisted_conjugacy::TwistedPair;

pub const DEFAULT_SEED: u64 = 0x5EED_1DE5;
pub const DEFAULT_TRIALS: usize = 100;

/// Computes invariants for a problem. The harness is generic over it so that a deliberately
/// broken engine can serve as a negative control.
pub trait Engine {
    fn name(&self) -> &'static str;
    fn evaluate(&self, p: &Problem) -> Result<Evaluation>;
}

pub struct StandardEngine;

impl Engine for StandardEngine {
    fn name(&self) -> &'static str {
        "standard"
    }

    fn evaluate(&self, p: &Problem) -> Result<Evaluation> {
        evaluate(p)
    }
}

/// Negative control: drops the sign of every Jacobian determinant.
pub struct SignBugEngine;

impl Engine for SignBugEngine {
    fn name(&self) -> &'static str {
        "sign-bug"
    }

    fn evaluate(&self, p: &Problem) -> Result<Evaluation> {
        let mut e = evaluate(p)?;
        for r in &mut e.records {
            r.lift_sign = r.lift_sign.abs();
        }
        e.index = index_from_records(&e.records, &p.orientation)?;
        e.trace = trace_from_records(&e.records, &p.orientation)?;
        Ok(e)
    }
}

#[derive(Debug, Clone)]
pub struct Failure {
    pub trial: usize,
    pub instance: String,
    pub what: String,
    pub left: String,
    pub right: String,
    /// The failing problem in config format.
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub engine: String,
    pub seed: u64,
    pub trials: usize,
    pub comparisons: usize,
    pub failures: Vec<Failure>,
    pub elapsed: Duration,
}

impl CheckReport {
    fn new(name: &str, engine: &dyn Engine, seed: u64, trials: usize) -> Self {
        CheckReport {
            name: name.into(),
            engine: engine.name().into(),
            seed,
            trials,
            comparisons: 0,
            failures: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn compare<T: PartialEq + Debug>(
        &mut self,
        trial: usize,
        instance: &str,
        what: &str,
        left: T,
        right: T,
        witness: Option<&Problem>,
    ) -> bool {
        self.comparisons += 1;
        if left == right {
            return true;
        }
        self.push(trial, instance, what, format!("{left:?}"), format!("{right:?}"), witness);
        false
    }

    fn fail(&mut self, trial: usize, instance: &str, what: &str, msg: String, witness: Option<&Problem>) {
        self.comparisons += 1;
        self.push(trial, instance, what, msg, String::new(), witness);
    }

    fn push(&mut self, trial: usize, instance: &str, what: &str, left: String, right: String, witness: Option<&Problem>) {
        let counterexample = witness.map(|p| {
            format!(
                "# check {} (engine {}), seed {}, trial {}: {}\n# left:  {}\n# right: {}\n{}",
                self.name,
                self.engine,
                self.seed,
                trial,
                what,
                left,
                right,
                to_config(p).to_toml()
            )
        });
        self.failures.push(Failure {
            trial,
            instance: instance.into(),
            what: what.into(),
            left,
            right,
            counterexample,
        });
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{:<28} {:>6} trials {:>7} comparisons {:>4} failures  {:>8.3}s  {}",
            self.name,
            self.trials,
            self.comparisons,
            self.failures.len(),
            self.elapsed.as_secs_f64(),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

pub fn to_config(p: &Problem) -> ProblemConfig {
    ProblemConfig {
        f: p.f.clone(),
        g: p.g.clone(),
        region: p.region.clone(),
        domain: p.domain.clone(),
        orientation: p.orientation.clone(),
        solver: p.solver,
    }
}

/// Writes every counterexample to `dir/<check>-<trial>.toml`.
pub fn write_counterexamples(reports: &[CheckReport], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for r in reports {
        for f in &r.failures {
            if let Some(text) = &f.counterexample {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(format!("{}-{}.toml", r.name, f.trial));
                std::fs::write(&path, text)?;
                out.push(path);
            }
        }
    }
    Ok(out)
}

/// The random stream of one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Torus(usize),
    Klein { orientation_true: bool },
    Fold,
}

fn family(trial: usize) -> Family {
    match trial % 5 {
        0 => Family::Torus(1),
        1 => Family::Torus(2),
        2 => Family::Torus(3),
        3 => Family::Klein {
            orientation_true: trial.is_multiple_of(2),
        },
        _ => Family::Fold,
    }
}

fn orientation_true_family(trial: usize) -> Family {
    match trial % 4 {
        0 => Family::Torus(1),
        1 => Family::Torus(2),
        2 => Family::Torus(3),
        _ => Family::Klein { orientation_true: true },
    }
}

fn random_fold<R: Rng>(rng: &mut R) -> KleinFold {
    let rho = Q::new(rng.random_range(4..=12), 64);
    let c = rho * Q::new(rng.random_range(1..=6), 8);
    KleinFold::new(rho, c)
}

fn instance<R: Rng>(rng: &mut R, fam: Family) -> (EquivariantLift, EquivariantLift) {
    match fam {
        Family::Torus(n) => {
            let bound = if n == 3 { 2 } else { 5 };
            let (f, g, _, _) = random_torus_pair(rng, n, bound);
            (f, g)
        }
        Family::Klein { orientation_true } => random_klein_pair(rng, orientation_true, 2),
        Family::Fold => {
            let fam = random_fold(rng);
            (fam.f(), fam.g())
        }
    }
}

fn describe(f: &EquivariantLift, g: &EquivariantLift) -> String {
    format!("{} -> {}: f_# = {}, g_# = {}", f.source(), f.target(), f.hom(), g.hom())
}

fn random_orientation<R: Rng>(rng: &mut R, records: &[CoincidenceRecord]) -> OrientationChoice {
    let mut table = BTreeMap::new();
    for r in records {
        table.entry(r.class_rep.clone()).or_insert_with(|| if rng.random_bool(0.5) { 1 } else { -1 });
    }
    OrientationChoice::per_class(table)
}

fn problem(f: &EquivariantLift, g: &EquivariantLift, region: OpenRegion, o: &OrientationChoice) -> Problem {
    let mut p = Problem::new(f.clone(), g.clone(), region);
    p.orientation = o.clone();
    p
}

/// Point of a record as an exact center for boxes (dyadic when only a float is known).
fn exact_center(r: &CoincidenceRecord) -> QVec {
    match r.point.exact() {
        Some(x) => x.clone(),
        None => r.point.to_f64().iter().map(|&v| dyadic(v, 32)).collect(),
    }
}

fn min_separation(m: &FlatManifold, records: &[CoincidenceRecord]) -> f64 {
    let pts: Vec<Vec<f64>> = records.iter().map(|r| r.point.to_f64()).collect();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in 0..i {
            best = best.min(m.quotient_distance(&pts[i], &pts[j]));
        }
    }
    best
}

/// Radius for disjoint cubes around every record, at most `cap`.
fn isolation_radius(m: &FlatManifold, records: &[CoincidenceRecord], cap: f64) -> Option<Q> {
    let r = (min_separation(m, records) / 4.0).min(cap);
    let q = Q::new((r * 4096.0).floor() as i128, 4096);
    (q > Q::from(0)).then_some(q)
}

fn cubes_around(records: &[CoincidenceRecord], r: Q) -> OpenRegion {
    OpenRegion::Boxes(records.iter().map(|x| OpenBox::cube(&exact_center(x), r)).collect())
}

/// Two disjoint boxes covering a fundamental domain, cut away from every coincidence.
fn split_region<R: Rng>(
    rng: &mut R,
    m: &FlatManifold,
    records: &[CoincidenceRecord],
) -> Option<(OpenRegion, OpenRegion)> {
    let n = m.dim();
    let widths: Vec<Q> = (0..n)
        .map(|i| if m.half_axis() == Some(i) { Q::new(1, 2) } else { Q::from(1) })
        .collect();
    let cut_axis = rng.random_range(0..n);
    'attempt: for _ in 0..200 {
        let lo: QVec = widths.iter().map(|w| -w * Q::new(rng.random_range(0..1024), 1024)).collect();
        let hi: QVec = lo.iter().zip(&widths).map(|(a, w)| a + w).collect();
        let s = lo[cut_axis] + widths[cut_axis] * Q::new(rng.random_range(128..896), 1024);
        let mut hi1 = hi.clone();
        hi1[cut_axis] = s;
        let mut lo2 = lo.clone();
        lo2[cut_axis] = s;
        let u1 = OpenRegion::Boxes(vec![OpenBox::new(lo, hi1).ok()?]);
        let u2 = OpenRegion::Boxes(vec![OpenBox::new(lo2, hi).ok()?]);
        let both = u1.union(&u2);
        for r in records {
            if both.inner_margin_f64(m, &r.point.to_f64()) < 1e-6 {
                continue 'attempt;
            }
        }
        return Some((u1, u2));
    }
    None
}

macro_rules! try_eval {
    ($report:expr, $engine:expr, $p:expr, $trial:expr, $desc:expr) => {
        match $engine.evaluate(&$p) {
            Ok(e) => e,
            Err(err) => {
                $report.fail($trial, &$desc, "evaluation", err.to_string(), Some(&$p));
                continue;
            }
        }
    };
}

/// `ι(U) = ι(U₁) + ι(U₂)` and likewise for the trace, for a cut of the fundamental domain.
pub fn check_additivity(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("additivity", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let (f, g) = instance(&mut rng, family(t));
        let desc = describe(&f, &g);
        let p0 = problem(&f, &g, OpenRegion::Full, &OrientationChoice::default());
        let e0 = try_eval!(rep, engine, p0, t, desc);
        let o = random_orientation(&mut rng, &e0.records);
        let full = problem(&f, &g, OpenRegion::Full, &o);
        let e = try_eval!(rep, engine, full, t, desc);
        let Some((u1, u2)) = split_region(&mut rng, f.source(), &e.records) else {
            rep.fail(t, &desc, "split", "no cut avoids the coincidences".into(), Some(&full));
            continue;
        };
        let p1 = problem(&f, &g, u1, &o);
        let p2 = problem(&f, &g, u2, &o);
        let e1 = try_eval!(rep, engine, p1, t, desc);
        let e2 = try_eval!(rep, engine, p2, t, desc);
        rep.compare(t, &desc, "index(U) = index(U1) + index(U2)", e.index, e1.index + e2.index, Some(&full));
        rep.compare(t, &desc, "trace(U) = trace(U1) + trace(U2)", e.trace.clone(), e1.trace + e2.trace, Some(&full));
        rep.compare(t, &desc, "points split", e.records.len(), e1.records.len() + e2.records.len(), Some(&full));
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Shrinking `U` to small cubes around the coincidences leaves index and trace unchanged.
pub fn check_excision(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("excision", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let (f, g) = instance(&mut rng, family(t));
        let desc = describe(&f, &g);
        let p0 = problem(&f, &g, OpenRegion::Full, &OrientationChoice::default());
        let e0 = try_eval!(rep, engine, p0, t, desc);
        let o = random_orientation(&mut rng, &e0.records);
        let full = problem(&f, &g, OpenRegion::Full, &o);
        let e = try_eval!(rep, engine, full, t, desc);
        // U₁ = U, U₂ = ∅
        let pe = problem(&f, &g, OpenRegion::empty(), &o);
        let ee = try_eval!(rep, engine, pe, t, desc);
        rep.compare(t, &desc, "index(U) = index(U) + index(∅)", e.index, e.index + ee.index, Some(&full));
        rep.compare(t, &desc, "index(∅) = 0", ee.index, IndexValue::ZERO, Some(&pe));
        if e.records.is_empty() || e.records.len() > 256 {
            continue;
        }
        let Some(r) = isolation_radius(f.source(), &e.records, 1.0 / 64.0) else {
            rep.fail(t, &desc, "isolation", "coincidences too close to isolate".into(), Some(&full));
            continue;
        };
        let ps = problem(&f, &g, cubes_around(&e.records, r), &o);
        let es = try_eval!(rep, engine, ps, t, desc);
        rep.compare(t, &desc, "index(U) = index(U')", e.index, es.index, Some(&ps));
        rep.compare(t, &desc, "trace(U) = trace(U')", e.trace.clone(), es.trace, Some(&ps));
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Circle maps `f = 0`, `g = c + ρ sin 2πx` with trivial homomorphisms: for `c < ρ` two
/// coincidences of opposite sign in one class, none for `c > ρ`.
pub fn cancelling_circle(rho: Q, c: Q) -> (EquivariantLift, EquivariantLift) {
    let s1 = FlatManifold::torus(1);
    let hom = InducedHom::from_matrix(s1.clone(), s1, &[vec![0]]).expect("trivial hom");
    let zero = QMat::from_int_rows(&[vec![0]]);
    let f = EquivariantLift::affine(hom.clone(), zero.clone(), vec![Q::from(0)]).expect("constant");
    let g = EquivariantLift::new(hom, zero, vec![c], vec![TrigTerm::new(vec![rho], vec![1], Q::from(0))])
        .expect("trivial hom admits every term");
    (f, g)
}

/// Index and trace are invariant under certified admissible homotopies.
pub fn check_homotopy(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("homotopy", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        if t % 5 == 4 {
            // a cancelling pair disappears
            let rho = Q::new(rng.random_range(4..=16), 64);
            let (f, g0) = cancelling_circle(rho, rho / Q::from(2));
            let (_, g1) = cancelling_circle(rho, rho * Q::new(3, 2));
            let desc = describe(&f, &g0);
            let o = OrientationChoice::default();
            let p0 = problem(&f, &g0, OpenRegion::Full, &o);
            let p1 = problem(&f, &g1, OpenRegion::Full, &o);
            if let Err(err) = certify_homotopy(&f, &f, &g0, &g1, &OpenRegion::Full) {
                rep.fail(t, &desc, "certificate", err.to_string(), Some(&p0));
                continue;
            }
            let e0 = try_eval!(rep, engine, p0, t, desc);
            let e1 = try_eval!(rep, engine, p1, t, desc);
            rep.compare(t, &desc, "cancelling pair present", e0.records.len(), 2, Some(&p0));
            rep.compare(t, &desc, "pair removed", e1.records.len(), 0, Some(&p1));
            rep.compare(t, &desc, "index invariant", e0.index, e1.index, Some(&p0));
            rep.compare(t, &desc, "trace invariant", e0.trace, e1.trace, Some(&p0));
            continue;
        }
        let (f, g) = instance(&mut rng, family(t));
        let desc = describe(&f, &g);
        let p0 = problem(&f, &g, OpenRegion::Full, &OrientationChoice::default());
        let e0 = try_eval!(rep, engine, p0, t, desc);
        let o = random_orientation(&mut rng, &e0.records);
        let region = if t % 2 == 0 {
            OpenRegion::Full
        } else {
            match split_region(&mut rng, f.source(), &e0.records) {
                Some((u1, _)) => u1,
                None => OpenRegion::Full,
            }
        };
        let start_p = problem(&f, &g, region.clone(), &o);
        let es = try_eval!(rep, engine, start_p, t, desc);
        // shrink the perturbation until it is certified and keeps the pair regular
        let mut done = false;
        let mut scale = 0.05;
        for _ in 0..6 {
            let g1 = perturb(&mut rng, &g, 2, scale);
            scale /= 2.0;
            let Ok((hf, hg)) = certify_homotopy(&f, &f, &g, &g1, &region) else {
                continue;
            };
            let end_p0 = problem(&f, &g1, region.clone(), &o);
            let Ok(probe) = evaluate(&end_p0) else {
                continue;
            };
            let o1 = match transport_through_homotopy(&o, &hf, &hg, &probe.records) {
                Ok(o1) => o1,
                Err(err) => {
                    rep.fail(t, &desc, "transport", err.to_string(), Some(&end_p0));
                    done = true;
                    break;
                }
            };
            let end_p = problem(&f, &g1, region.clone(), &o1);
            let ee = try_eval!(rep, engine, end_p, t, desc);
            rep.compare(t, &desc, "index invariant", es.index, ee.index, Some(&end_p));
            rep.compare(t, &desc, "trace invariant", es.trace.clone(), ee.trace, Some(&end_p));
            done = true;
            break;
        }
        if !done {
            // fall back to the constant homotopy
            let ec = try_eval!(rep, engine, start_p, t, desc);
            rep.compare(t, &desc, "constant homotopy", es.index, ec.index, Some(&start_p));
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

/// A constant map against a local embedding gives `(1, 0)` once the orientation makes the
/// embedding positive, and `(0, 1)` at a degenerate coincidence.
pub fn check_normalization(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("normalization", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let (f, g, degenerate) = match t % 3 {
            0 => {
                let n = 1 + (t / 3) % 3;
                let g = loop {
                    let (_, g, _, b) = random_torus_pair(&mut rng, n, if n == 3 { 2 } else { 3 });
                    if det_of(&b) != 0 {
                        break g;
                    }
                };
                (constant_like(&g, &mut rng), g, false)
            }
            1 => {
                let g = loop {
                    let (_, g) = random_klein_pair(&mut rng, false, 2);
                    if !g.linear().det().is_zero() {
                        break g;
                    }
                };
                (constant_like(&g, &mut rng), g, false)
            }
            _ => {
                let k = random_fold(&mut rng);
                let k = KleinFold::constant(k.rho, k.c);
                (k.f(), k.g(), true)
            }
        };
        let desc = describe(&f, &g);
        let p0 = problem(&f, &g, OpenRegion::Full, &OrientationChoice::default());
        let e0 = try_eval!(rep, engine, p0, t, desc);
        if e0.records.is_empty() {
            rep.fail(t, &desc, "setup", "no coincidence to isolate".into(), Some(&p0));
            continue;
        }
        let pick = &e0.records[rng.random_range(0..e0.records.len())];
        let r = isolation_radius(f.source(), &e0.records, 1.0 / 64.0).unwrap_or(Q::new(1, 4096));
        let region = OpenRegion::Boxes(vec![OpenBox::cube(&exact_center(pick), r)]);
        let base = OrientationChoice::per_class(BTreeMap::new());
        let o = match sign_of_embedding(&g, pick, &base) {
            Ok(1) => base,
            Ok(_) => base.negate(),
            Err(err) => {
                rep.fail(t, &desc, "sign_of_embedding", err.to_string(), Some(&p0));
                continue;
            }
        };
        rep.compare(t, &desc, "embedding made positive", sign_of_embedding(&g, pick, &o).ok(), Some(1), Some(&p0));
        let p = problem(&f, &g, region, &o);
        let e = try_eval!(rep, engine, p, t, desc);
        let expected = if degenerate { IndexValue::new(0, 1) } else { IndexValue::new(1, 0) };
        rep.compare(t, &desc, "normalized index", e.index, expected, Some(&p));
        rep.compare(t, &desc, "degeneracy flag", pick.degenerate, degenerate, Some(&p));
    }
    rep.elapsed = start.elapsed();
    rep
}

/// A constant lift with the trivial homomorphism into the target of `g`.
fn constant_like<R: Rng>(g: &EquivariantLift, rng: &mut R) -> EquivariantLift {
    let src = g.source().clone();
    let tgt = g.target().clone();
    let images = vec![tgt.identity(); src.generators().len()];
    let hom = InducedHom::new(src.clone(), tgt.clone(), images).expect("trivial hom");
    let c: QVec = (0..tgt.dim()).map(|_| Q::new(rng.random_range(0..32), 32)).collect();
    EquivariantLift::affine(hom, QMat::from_rows(&vec![vec![Q::from(0); src.dim()]; tgt.dim()]), c)
        .expect("constants are equivariant under the trivial hom")
}

/// `ι(f, g, U, O) = (−1)^n ι(g, f, U, O')` for orientation-true pairs.
pub fn check_swap(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("swap", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let (f, g) = instance(&mut rng, orientation_true_family(t));
        let desc = describe(&f, &g);
        let n = f.source().dim();
        let o = if f.target().is_orientable() {
            OrientationChoice::global(if rng.random_bool(0.5) { 1 } else { -1 })
        } else {
            OrientationChoice::default()
        };
        let pfg = problem(&f, &g, OpenRegion::Full, &o);
        let efg = try_eval!(rep, engine, pfg, t, desc);
        let pair = match TwistedPair::new(g.hom(), f.hom()) {
            Ok(p) => p,
            Err(err) => {
                rep.fail(t, &desc, "swapped pair", err.to_string(), Some(&pfg));
                continue;
            }
        };
        let o2 = swapped_orientation(&o, &efg.records, &pair);
        let pgf = problem(&g, &f, OpenRegion::Full, &o2);
        let egf = try_eval!(rep, engine, pgf, t, desc);
        let sign = if n % 2 == 0 { 1 } else { -1 };
        rep.compare(t, &desc, "index(f,g) = (-1)^n index(g,f)", efg.index.z, sign * egf.index.z, Some(&pfg));
        rep.compare(t, &desc, "z2 parts vanish", (efg.index.z2, egf.index.z2), (0, 0), Some(&pfg));
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Negating the orientation negates `z` and keeps `z2`.
pub fn check_flip(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("orientation-flip", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let (f, g) = instance(&mut rng, family(t));
        let desc = describe(&f, &g);
        let p0 = problem(&f, &g, OpenRegion::Full, &OrientationChoice::default());
        let e0 = try_eval!(rep, engine, p0, t, desc);
        let o = random_orientation(&mut rng, &e0.records);
        let p = problem(&f, &g, OpenRegion::Full, &o);
        let pn = problem(&f, &g, OpenRegion::Full, &o.negate());
        let e = try_eval!(rep, engine, p, t, desc);
        let en = try_eval!(rep, engine, pn, t, desc);
        rep.compare(t, &desc, "index(-O) = -index(O)", en.index, e.index.negate_z(), Some(&p));
    }
    rep.elapsed = start.elapsed();
    rep
}

/// For orientation-true `g`, reading the index inside a chart `W ⊇ U` changes nothing.
pub fn check_localization(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("localization", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let (f, g) = instance(&mut rng, orientation_true_family(t));
        let desc = describe(&f, &g);
        let o = OrientationChoice::global(if rng.random_bool(0.5) { 1 } else { -1 });
        let p0 = problem(&f, &g, OpenRegion::Full, &o);
        let e0 = try_eval!(rep, engine, p0, t, desc);
        if e0.records.is_empty() {
            continue;
        }
        let pick = &e0.records[rng.random_range(0..e0.records.len())];
        let r = isolation_radius(f.source(), &e0.records, 1.0 / 64.0).unwrap_or(Q::new(1, 4096));
        let center = exact_center(pick);
        let region = OpenRegion::Boxes(vec![OpenBox::cube(&center, r)]);
        let w = OpenBox::cube(&center, r * Q::from(4));
        let pu = problem(&f, &g, region.clone(), &o);
        let mut pw = pu.clone();
        pw.domain = match DomainMarker::chart(f.source(), w) {
            Ok(d) => d,
            Err(err) => {
                rep.fail(t, &desc, "chart", err.to_string(), Some(&pu));
                continue;
            }
        };
        let eu = try_eval!(rep, engine, pu, t, desc);
        let ew = try_eval!(rep, engine, pw, t, desc);
        rep.compare(t, &desc, "index(U, M) = index(U, W)", eu.index, ew.index, Some(&pw));
    }
    rep.elapsed = start.elapsed();
    rep
}

/// The same point is degenerate in the Klein bottle but not inside a chart, and the two
/// indices land in different summands; tori and orientation-true pairs show no dependence.
pub fn check_domain_dependence(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("domain-dependence", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        match t % 3 {
            0 => {
                let fam = random_fold(&mut rng);
                let (f, g) = (fam.f(), fam.g());
                let desc = describe(&f, &g);
                let u = OpenRegion::Boxes(vec![fam.chart_box()]);
                let pm = problem(&f, &g, u, &OrientationChoice::default());
                let mut pv = pm.clone();
                let b = fam.chart_box();
                let center: QVec = b.lo.iter().zip(&b.hi).map(|(a, c)| (a + c) / Q::from(2)).collect();
                pv.domain = DomainMarker::Chart(OpenBox::cube(&center, Q::new(1, 32)));
                let em = try_eval!(rep, engine, pm, t, desc);
                let ev = try_eval!(rep, engine, pv, t, desc);
                rep.compare(t, &desc, "full domain gives (0,1)", em.index, IndexValue::new(0, 1), Some(&pm));
                rep.compare(t, &desc, "chart gives (±1,0)", (ev.index.z.abs(), ev.index.z2), (1, 0), Some(&pv));
            }
            k => {
                let fam = if k == 1 { Family::Torus(1 + (t / 3) % 3) } else { Family::Klein { orientation_true: true } };
                let (f, g) = instance(&mut rng, fam);
                let desc = describe(&f, &g);
                let o = OrientationChoice::global(1);
                let p0 = problem(&f, &g, OpenRegion::Full, &o);
                let e0 = try_eval!(rep, engine, p0, t, desc);
                if e0.records.is_empty() {
                    continue;
                }
                let pick = &e0.records[0];
                let r = isolation_radius(f.source(), &e0.records, 1.0 / 64.0).unwrap_or(Q::new(1, 4096));
                let center = exact_center(pick);
                let pm = problem(&f, &g, OpenRegion::Boxes(vec![OpenBox::cube(&center, r)]), &o);
                let mut pv = pm.clone();
                pv.domain = DomainMarker::Chart(OpenBox::cube(&center, r * Q::from(2)));
                let em = try_eval!(rep, engine, pm, t, desc);
                let ev = try_eval!(rep, engine, pv, t, desc);
                rep.compare(t, &desc, "control: no dependence", em.index, ev.index, Some(&pm));
            }
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Survivors of pairing opposite signs inside one class (any two points of a degenerate class).
pub fn pairing_survivors(signs: &[i8], degenerate: bool) -> u64 {
    if degenerate {
        return (signs.len() % 2) as u64;
    }
    let plus = signs.iter().filter(|&&s| s > 0).count() as i64;
    let minus = signs.iter().filter(|&&s| s < 0).count() as i64;
    (plus - minus).unsigned_abs()
}

/// Per-class semi-index against the pairing count.
pub fn class_semi_index_mismatches(e: &Evaluation, o: &OrientationChoice) -> Vec<(DeckElement, u64, u64)> {
    let mut by_class: BTreeMap<DeckElement, (bool, Vec<i8>)> = BTreeMap::new();
    for r in &e.records {
        let s = r.lift_sign * r.alignment * o.sign_for(&r.class_rep);
        let entry = by_class.entry(r.class_rep.clone()).or_insert((r.degenerate, Vec::new()));
        entry.1.push(s);
    }
    by_class
        .into_iter()
        .filter_map(|(rep, (deg, signs))| {
            let oracle = pairing_survivors(&signs, deg);
            let value = e.trace.get(&rep).map_or(IndexValue::ZERO, |c| c.as_index());
            let got = semi_index(value);
            (got != oracle).then_some((rep, got, oracle))
        })
        .collect()
}

fn wiggly_instance<R: Rng>(rng: &mut R, trial: usize) -> (EquivariantLift, EquivariantLift) {
    match trial % 3 {
        0 => {
            let (f, g, _, _) = random_torus_pair(rng, 1, 3);
            (f, perturb(rng, &g, 2, 0.3))
        }
        1 => {
            let (f, g, _, _) = random_torus_pair(rng, 2, 2);
            (f, perturb(rng, &g, 2, 0.12))
        }
        _ => {
            let fam = random_fold(rng);
            (fam.f(), fam.g())
        }
    }
}

/// Degenerate points cancel in pairs; class semi-indices count pairing survivors; orientation
/// true pairs have no `ℤ₂` part.
pub fn check_cancellation(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("cancellation", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        match t % 3 {
            0 => {
                let fam = random_fold(&mut rng);
                let (f, g) = (fam.f(), fam.g());
                let desc = describe(&f, &g);
                let o = OrientationChoice::default();
                let p2 = problem(&f, &g, KleinFold::pair_region(), &o);
                let e2 = try_eval!(rep, engine, p2, t, desc);
                rep.compare(t, &desc, "two degenerate points", e2.records.len(), 2, Some(&p2));
                rep.compare(t, &desc, "two degenerate points: z2 = 0", e2.index, IndexValue::ZERO, Some(&p2));
                let g_end = fam.with_c(fam.rho * Q::new(3, 2)).g();
                if let Err(err) = certify_homotopy(&f, &f, &g, &g_end, &KleinFold::pair_region()) {
                    rep.fail(t, &desc, "removal homotopy", err.to_string(), Some(&p2));
                    continue;
                }
                let pe = problem(&f, &g_end, KleinFold::pair_region(), &o);
                let ee = try_eval!(rep, engine, pe, t, desc);
                rep.compare(t, &desc, "homotoped to empty", ee.records.len(), 0, Some(&pe));
                rep.compare(t, &desc, "empty index", ee.index, IndexValue::ZERO, Some(&pe));
                let p3 = problem(&f, &g, fam.triple_region(), &o);
                let e3 = try_eval!(rep, engine, p3, t, desc);
                rep.compare(t, &desc, "three degenerate points", e3.records.len(), 3, Some(&p3));
                rep.compare(t, &desc, "three points: z2 = 1", e3.index, IndexValue::new(0, 1), Some(&p3));
            }
            1 => {
                let (f, g) = wiggly_instance(&mut rng, t / 3);
                let desc = describe(&f, &g);
                let p0 = problem(&f, &g, OpenRegion::Full, &OrientationChoice::default());
                let e0 = try_eval!(rep, engine, p0, t, desc);
                let o = random_orientation(&mut rng, &e0.records);
                let p = problem(&f, &g, OpenRegion::Full, &o);
                let e = try_eval!(rep, engine, p, t, desc);
                let bad = class_semi_index_mismatches(&e, &o);
                rep.compare(t, &desc, "class semi-index = pairing survivors", bad, Vec::new(), Some(&p));
            }
            _ => {
                let (f, g) = instance(&mut rng, orientation_true_family(t));
                let desc = describe(&f, &g);
                let p = problem(&f, &g, OpenRegion::Full, &OrientationChoice::default());
                let e = try_eval!(rep, engine, p, t, desc);
                rep.compare(t, &desc, "orientation true: z2 = 0", e.index.z2, 0, Some(&p));
                rep.compare(t, &desc, "no degenerate record", e.records.iter().any(|r| r.degenerate), false, Some(&p));
            }
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

/// Trace coefficients live in `ℤ` at nondegenerate classes and `ℤ₂` at degenerate ones, and
/// `ε(trace) = index`.
pub fn check_value_group(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("value-group", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let (f, g) = if t % 2 == 0 { instance(&mut rng, family(t / 2)) } else { wiggly_instance(&mut rng, t / 2) };
        let desc = describe(&f, &g);
        let p = problem(&f, &g, OpenRegion::Full, &OrientationChoice::default());
        let e = try_eval!(rep, engine, p, t, desc);
        let pair = match TwistedPair::new(f.hom(), g.hom()) {
            Ok(x) => x,
            Err(err) => {
                rep.fail(t, &desc, "pair", err.to_string(), Some(&p));
                continue;
            }
        };
        let wrong: Vec<&DeckElement> = e
            .trace
            .entries()
            .iter()
            .filter(|(rep, c)| matches!(c, Coefficient::Z2(_)) != pair.is_degenerate(rep))
            .map(|(rep, _)| rep)
            .collect();
        rep.compare(t, &desc, "coefficient group matches class degeneracy", wrong, Vec::new(), Some(&p));
        rep.compare(t, &desc, "epsilon(trace) = index", e.trace.epsilon(), e.index, Some(&p));
    }
    rep.elapsed = start.elapsed();
    rep
}

fn jac_sign_at(f: &EquivariantLift, g: &EquivariantLift, alpha: &DeckElement, x: &[f64]) -> i8 {
    let a = f.target().linear_diag(alpha.eps);
    let jf = f.jacobian(x);
    let jg = g.jacobian(x);
    let m: Vec<Vec<f64>> = (0..a.len())
        .map(|i| (0..x.len()).map(|j| jg[i][j] - a[i] as f64 * jf[i][j]).collect())
        .collect();
    let d = crate::coincidence_solver::det_f64(&m);
    if d > 0.0 {
        1
    } else if d < 0.0 {
        -1
    } else {
        0
    }
}

/// A coincidence is degenerate (some lift-stabilizing loop reverses the local sign) exactly
/// when its class is degenerate.
pub fn check_degeneracy_correspondence(engine: &dyn Engine, seed: u64, trials: usize) -> CheckReport {
    let start = Instant::now();
    let mut rep = CheckReport::new("degeneracy-correspondence", engine, seed, trials);
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        let (f, g) = match t % 3 {
            0 => {
                let fam = random_fold(&mut rng);
                (fam.f(), fam.g())
            }
            1 => random_klein_pair(&mut rng, false, 2),
            _ => {
                let (f, g) = random_klein_pair(&mut rng, false, 2);
                (f.clone(), perturb(&mut rng, &g, 2, 0.02))
            }
        };
        let desc = describe(&f, &g);
        let p = problem(&f, &g, OpenRegion::Full, &OrientationChoice::default());
        let e = try_eval!(rep, engine, p, t, desc);
        let pair = match TwistedPair::new(f.hom(), g.hom()) {
            Ok(x) => x,
            Err(err) => {
                rep.fail(t, &desc, "pair", err.to_string(), Some(&p));
                continue;
            }
        };
        let src = f.source();
        for r in e.records.iter().take(24) {
            let alpha = &r.class_element;
            let x = r.lift_f64(src);
            let class_flag = pair.is_degenerate(&r.class_rep);
            rep.compare(t, &desc, "point flag = class flag", r.degenerate, class_flag, Some(&p));
            // brute force over small loops, with the sign recomputed at the moved lift
            let mut brute = false;
            for eps in 0..2u8 {
                for a in -3..=3 {
                    for b in -3..=3 {
                        let gamma = DeckElement::new(eps, vec![a, b]);
                        if pair.act(&gamma, alpha) != *alpha {
                            continue;
                        }
                        let moved = src.apply_f64(&gamma, &x);
                        let flipped = jac_sign_at(&f, &g, alpha, &moved) == -jac_sign_at(&f, &g, alpha, &x);
                        rep.compare(t, &desc, "sign flip = alignment -1", flipped, pair.alignment(&gamma) == -1, Some(&p));
                        brute |= flipped;
                    }
                }
            }
            if brute {
                rep.compare(t, &desc, "small flipping loop implies degenerate", class_flag, true, Some(&p));
            }
            if let Some(w) = pair.degeneracy_witness(alpha) {
                let ok = pair.act(&w, alpha) == *alpha && pair.alignment(&w) == -1;
                rep.compare(t, &desc, "degeneracy witness verifies", ok, true, Some(&p));
            }
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

pub type CheckFn = fn(&dyn Engine, u64, usize) -> CheckReport;

/// Every check, in reporting order.
pub const CHECKS: &[(&str, CheckFn)] = &[
    ("additivity", check_additivity),
    ("excision", check_excision),
    ("homotopy", check_homotopy),
    ("normalization", check_normalization),
    ("swap", check_swap),
    ("orientation-flip", check_flip),
    ("localization", check_localization),
    ("domain-dependence", check_domain_dependence),
    ("cancellation", check_cancellation),
    ("value-group", check_value_group),
    ("degeneracy-correspondence", check_degeneracy_correspondence),
];

pub fn run_all(engine: &dyn Engine, seed: u64, trials: usize) -> Vec<CheckReport> {
    CHECKS.iter().map(|(_, check)| check(engine, seed, trials)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_oracle() {
        assert_eq!(pairing_survivors(&[1, -1, 1], false), 1);
        assert_eq!(pairing_survivors(&[1, 1, 1, -1, 1], false), 3);
        assert_eq!(pairing_survivors(&[1, -1, 1], true), 1);
        assert_eq!(pairing_survivors(&[1, 1], true), 0);
    }

    #[test]
    fn few_trials_pass() {
        for (name, check) in CHECKS {
            let r = check(&StandardEngine, 11, 6);
            assert!(r.passed(), "{name}: {:#?}", r.failures);
        }
    }

    #[test]
    fn sign_bug_is_caught() {
        let r = check_swap(&SignBugEngine, 11, 6);
        assert!(!r.passed());
        let cx = r.failures[0].counterexample.as_ref().unwrap();
        assert!(ProblemConfig::from_toml(cx).is_ok());
    }
}
