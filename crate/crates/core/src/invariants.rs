//! The `ℤ ⊕ ℤ₂` coincidence index, the Reidemeister trace and the semi-index.
//!
//! Every regular coincidence point contributes `±1` to its class. Nondegenerate classes add
//! these signs in `ℤ`; degenerate classes only keep the parity of their point count.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::coincidence_solver::{CoincidenceRecord, CoincidenceSolver, SolverMode, SolverOptions};
use crate::equivariant_map::EquivariantLift;
use crate::error::{Error, Result};
use crate::flat_space::{DeckElement, DomainMarker, OpenRegion};
use crate::homotopy::{regularize, Regularization};
use crate::orientation_system::OrientationChoice;

/// An element `(z, z2)` of `ℤ ⊕ ℤ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct IndexValue {
    pub z: i64,
    pub z2: u8,
}

impl IndexValue {
    pub const ZERO: IndexValue = IndexValue { z: 0, z2: 0 };

    pub fn new(z: i64, z2: u8) -> Self {
        IndexValue { z, z2: z2 % 2 }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// `(−z, z2)`: `ℤ₂` carries no sign.
    pub fn negate_z(self) -> Self {
        IndexValue { z: -self.z, z2: self.z2 }
    }
}

impl Add for IndexValue {
    type Output = IndexValue;

    fn add(self, rhs: IndexValue) -> IndexValue {
        IndexValue {
            z: self.z + rhs.z,
            z2: (self.z2 + rhs.z2) % 2,
        }
    }
}

impl AddAssign for IndexValue {
    fn add_assign(&mut self, rhs: IndexValue) {
        *self = *self + rhs;
    }
}

impl Sum for IndexValue {
    fn sum<I: Iterator<Item = IndexValue>>(iter: I) -> IndexValue {
        iter.fold(IndexValue::ZERO, Add::add)
    }
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.z, self.z2)
    }
}

/// A trace coefficient: an integer at a nondegenerate class, a residue mod 2 at a degenerate one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coefficient {
    Z(i64),
    Z2(u8),
}

impl Coefficient {
    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Z(0) | Coefficient::Z2(0))
    }

    pub fn as_index(&self) -> IndexValue {
        match *self {
            Coefficient::Z(z) => IndexValue::new(z, 0),
            Coefficient::Z2(b) => IndexValue::new(0, b),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Z(z) => write!(f, "{z}"),
            Coefficient::Z2(b) => write!(f, "{b}̄"),
        }
    }
}

/// Finite formal sum of classes; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceValue {
    entries: BTreeMap<DeckElement, Coefficient>,
}

impl TraceValue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &BTreeMap<DeckElement, Coefficient> {
        &self.entries
    }

    pub fn get(&self, class_rep: &DeckElement) -> Option<Coefficient> {
        self.entries.get(class_rep).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `c` at `class_rep`. Mixing a `ℤ` and a `ℤ₂` coefficient on one class is a bug.
    pub fn add_term(&mut self, class_rep: DeckElement, c: Coefficient) {
        let merged = match (self.entries.get(&class_rep), c) {
            (None, c) => c,
            (Some(Coefficient::Z(a)), Coefficient::Z(b)) => Coefficient::Z(a + b),
            (Some(Coefficient::Z2(a)), Coefficient::Z2(b)) => Coefficient::Z2((a + b) % 2),
            (Some(a), b) => panic!("class {class_rep} carries both {a:?} and {b:?}"),
        };
        if merged.is_zero() {
            self.entries.remove(&class_rep);
        } else {
            self.entries.insert(class_rep, merged);
        }
    }

    /// `ε`: sum of the integer coefficients, parity of the `ℤ₂` ones.
    pub fn epsilon(&self) -> IndexValue {
        self.entries.values().map(Coefficient::as_index).sum()
    }

    /// Classes with a nonzero coefficient.
    pub fn nielsen_count(&self) -> usize {
        self.entries.len()
    }
}

impl Add for TraceValue {
    type Output = TraceValue;

    fn add(mut self, rhs: TraceValue) -> TraceValue {
        for (k, c) in rhs.entries {
            self.add_term(k, c);
        }
        self
    }
}

/// Contribution of one regular coincidence point.
pub fn local_index(record: &CoincidenceRecord, o: &OrientationChoice) -> Result<IndexValue> {
    if !record.regular {
        return Err(Error::NotRegular);
    }
    if record.degenerate {
        return Ok(IndexValue::new(0, 1));
    }
    let s = record.lift_sign as i64 * record.alignment as i64 * o.sign_for(&record.class_rep) as i64;
    Ok(IndexValue::new(s, 0))
}

fn coefficient_of(record: &CoincidenceRecord, o: &OrientationChoice) -> Result<Coefficient> {
    let v = local_index(record, o)?;
    Ok(if record.degenerate { Coefficient::Z2(v.z2) } else { Coefficient::Z(v.z) })
}

pub fn index_from_records(records: &[CoincidenceRecord], o: &OrientationChoice) -> Result<IndexValue> {
    records.iter().map(|r| local_index(r, o)).sum()
}

pub fn trace_from_records(records: &[CoincidenceRecord], o: &OrientationChoice) -> Result<TraceValue> {
    let mut t = TraceValue::new();
    for r in records {
        t.add_term(r.class_rep.clone(), coefficient_of(r, o)?);
    }
    Ok(t)
}

/// `|z| + z2`.
pub fn semi_index(v: IndexValue) -> u64 {
    v.z.unsigned_abs() + v.z2 as u64
}

pub fn nielsen_count(t: &TraceValue) -> usize {
    t.nielsen_count()
}

/// Everything needed to evaluate the invariants of `(f, g)` on `U`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub f: EquivariantLift,
    pub g: EquivariantLift,
    pub region: OpenRegion,
    pub domain: DomainMarker,
    pub orientation: OrientationChoice,
    pub solver: SolverOptions,
    /// Seed for regularizing irregular pairs first; `None` reports them as errors instead.
    pub regularize_seed: Option<u64>,
}

impl Problem {
    pub fn new(f: EquivariantLift, g: EquivariantLift, region: OpenRegion) -> Self {
        Problem {
            f,
            g,
            region,
            domain: DomainMarker::Full,
            orientation: OrientationChoice::default(),
            solver: SolverOptions::default(),
            regularize_seed: None,
        }
    }
}

/// Solver output together with the invariants assembled from it.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// The pair actually solved (differs from the input after regularization).
    pub f: EquivariantLift,
    pub g: EquivariantLift,
    pub regularization: Option<Regularization>,
    pub records: Vec<CoincidenceRecord>,
    pub index: IndexValue,
    pub trace: TraceValue,
}

impl Evaluation {
    pub fn semi_index(&self) -> u64 {
        semi_index(self.index)
    }
}

fn solve_records(
    f: &EquivariantLift,
    g: &EquivariantLift,
    region: &OpenRegion,
    domain: &DomainMarker,
    opts: SolverOptions,
) -> Result<Vec<CoincidenceRecord>> {
    let solver = CoincidenceSolver::new(f, g, opts)?;
    let singular_affine = f.is_affine() && g.is_affine() && !solver.is_nonsingular_affine();
    match solver.find(region, domain) {
        // affine pairs with a singular sheet only fail when a coincidence actually exists
        Err(Error::NonRegularPoint(msg) | Error::ToleranceNotMet(msg))
            if singular_affine && opts.mode == SolverMode::Auto =>
        {
            Err(Error::SingularPair(msg))
        }
        other => other,
    }
}

pub fn evaluate(problem: &Problem) -> Result<Evaluation> {
    problem.region.validate(problem.f.source())?;
    let (f, g, reg) = match problem.regularize_seed {
        Some(seed) => {
            let r = regularize(&problem.f, &problem.g, &problem.region, seed, problem.solver)?;
            (r.f.clone(), r.g.clone(), Some(r))
        }
        None => (problem.f.clone(), problem.g.clone(), None),
    };
    let records = solve_records(&f, &g, &problem.region, &problem.domain, problem.solver)?;
    let index = index_from_records(&records, &problem.orientation)?;
    let trace = trace_from_records(&records, &problem.orientation)?;
    debug_assert_eq!(trace.epsilon(), index);
    Ok(Evaluation {
        f,
        g,
        regularization: reg,
        records,
        index,
        trace,
    })
}

/// `ι(f, g, U, O)` with degeneracy read against the deck group of `domain`.
pub fn total_index(
    f: &EquivariantLift,
    g: &EquivariantLift,
    region: &OpenRegion,
    domain: &DomainMarker,
    o: &OrientationChoice,
) -> Result<IndexValue> {
    let records = solve_records(f, g, region, domain, SolverOptions::default())?;
    index_from_records(&records, o)
}

pub fn reidemeister_trace(
    f: &EquivariantLift,
    g: &EquivariantLift,
    region: &OpenRegion,
    o: &OrientationChoice,
) -> Result<TraceValue> {
    let records = solve_records(f, g, region, &DomainMarker::Full, SolverOptions::default())?;
    trace_from_records(&records, o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariant_map::InducedHom;
    use crate::flat_space::FlatManifold;
    use crate::rational::{q, QMat};

    fn torus_lift(b: &[Vec<i64>]) -> EquivariantLift {
        let n = b.len();
        let hom = InducedHom::from_matrix(FlatManifold::torus(n), FlatManifold::torus(n), b).unwrap();
        EquivariantLift::affine(hom, QMat::from_int_rows(b), vec![q(0); n]).unwrap()
    }

    #[test]
    fn group_law_and_semi_index() {
        let a = IndexValue::new(-3, 1);
        assert_eq!(semi_index(a), 4);
        assert_eq!(semi_index(IndexValue::ZERO), 0);
        assert_eq!(semi_index(IndexValue::new(5, 0)), 5);
        assert_eq!(a + a, IndexValue::new(-6, 0));
        assert_eq!(a.negate_z(), IndexValue::new(3, 1));
    }

    #[test]
    fn trace_drops_cancelled_classes() {
        let c = DeckElement::translation(vec![0]);
        let mut t = TraceValue::new();
        t.add_term(c.clone(), Coefficient::Z(1));
        t.add_term(c.clone(), Coefficient::Z(-1));
        assert!(t.is_empty());
        t.add_term(c.clone(), Coefficient::Z2(1));
        t.add_term(c, Coefficient::Z2(1));
        assert_eq!(t.nielsen_count(), 0);
    }

    #[test]
    fn torus_diag_two_three_index() {
        let f = torus_lift(&[vec![0, 0], vec![0, 0]]);
        let g = torus_lift(&[vec![2, 0], vec![0, 3]]);
        let o = OrientationChoice::global(1);
        let v = total_index(&f, &g, &OpenRegion::Full, &DomainMarker::Full, &o).unwrap();
        assert_eq!(v, IndexValue::new(6, 0));
        let t = reidemeister_trace(&f, &g, &OpenRegion::Full, &o).unwrap();
        assert_eq!(t.nielsen_count(), 6);
        assert_eq!(t.epsilon(), v);
        assert_eq!(total_index(&f, &g, &OpenRegion::empty(), &DomainMarker::Full, &o).unwrap(), IndexValue::ZERO);
    }

    #[test]
    fn singular_affine_pair_is_reported() {
        let f = torus_lift(&[vec![2]]);
        let err = total_index(&f, &f, &OpenRegion::Full, &DomainMarker::Full, &OrientationChoice::default());
        assert!(matches!(err, Err(Error::SingularPair(_))), "{err:?}");
        let mut p = Problem::new(f.clone(), f, OpenRegion::Full);
        p.regularize_seed = Some(3);
        let e = evaluate(&p).unwrap();
        assert_eq!(e.index, IndexValue::ZERO);
    }

    mod props {
        use super::*;
        use crate::instances::torus_pair;
        use crate::rational::qr;
        use proptest::prelude::*;

        /// Cofactor expansion, independent of the lattice code.
        fn det(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|j| {
                    let minor: Vec<Vec<i64>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                        .collect();
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    sign * m[0][j] * det(&minor)
                })
                .sum()
        }

        type Instance = (Vec<Vec<i64>>, Vec<Vec<i64>>, Vec<i128>, Vec<i128>);

        fn pair() -> impl Strategy<Value = Instance> {
            (1usize..=3).prop_flat_map(|n| {
                let bound: i64 = if n == 3 { 2 } else { 5 };
                let m = proptest::collection::vec(proptest::collection::vec(-bound..=bound, n), n);
                let v = proptest::collection::vec(0i128..16, n);
                (m.clone(), m, v.clone(), v)
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn torus_count_law((a, b, vf, vg) in pair()) {
                let d: Vec<Vec<i64>> = b.iter().zip(&a).map(|(rb, ra)| rb.iter().zip(ra).map(|(x, y)| x - y).collect()).collect();
                let dd = det(&d);
                prop_assume!(dd != 0);
                let vf = vf.iter().map(|&x| qr(x, 16)).collect();
                let vg = vg.iter().map(|&x| qr(x, 16)).collect();
                let (f, g) = torus_pair(&a, &b, vf, vg).unwrap();
                let e = evaluate(&Problem::new(f, g, OpenRegion::Full)).unwrap();
                prop_assert_eq!(e.records.len() as i64, dd.abs());
                prop_assert_eq!(e.index, IndexValue::new(dd, 0));
                prop_assert_eq!(e.trace.epsilon(), e.index);
                prop_assert!(e.trace.entries().values().all(|c| *c == Coefficient::Z(dd.signum())));
            }

            #[test]
            fn index_group_laws(a in -50i64..50, b in -50i64..50, c in -50i64..50, x in 0u8..2, y in 0u8..2) {
                let (u, v, w) = (IndexValue::new(a, x), IndexValue::new(b, y), IndexValue::new(c, 0));
                prop_assert_eq!(u + v, v + u);
                prop_assert_eq!((u + v) + w, u + (v + w));
                prop_assert_eq!(u + IndexValue::ZERO, u);
                prop_assert!((u + u).z2 == 0);
                prop_assert_eq!(semi_index(u), a.unsigned_abs() + x as u64);
            }
        }
    }
}
