//! Orientation choices along the coincidence set, encoded as per-class signs.
//!
//! A sign `σ` for a class is read relative to the standard orientation of `R^n` on both
//! sides, at a lift of the point whose deck element is the class representative. Transport
//! along paths in flat coordinates is multiplication by the orientation character, which the
//! alignment factor of each coincidence record accounts for.

use std::collections::BTreeMap;

use crate::coincidence_solver::CoincidenceRecord;
use crate::equivariant_map::{AdmissibleHomotopy, EquivariantLift, InducedHom};
use crate::error::{Error, Result};
use crate::flat_space::DeckElement;
use crate::twisted_conjugacy::TwistedPair;
use crate::coincidence_solver::det_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrientationScope {
    /// One sign for the whole coincidence set; needs `g` orientation true.
    Global,
    /// Independent sign per Reidemeister class.
    PerClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrientationChoice {
    scope: OrientationScope,
    /// Sign of every class missing from `table` (the single sign in global scope).
    default_sign: i8,
    table: BTreeMap<DeckElement, i8>,
}

impl Default for OrientationChoice {
    fn default() -> Self {
        OrientationChoice::per_class(BTreeMap::new())
    }
}

impl OrientationChoice {
    pub fn global(sign: i8) -> Self {
        OrientationChoice {
            scope: OrientationScope::Global,
            default_sign: normalize(sign),
            table: BTreeMap::new(),
        }
    }

    /// Listed classes get their sign, all others `+1`.
    pub fn per_class(table: BTreeMap<DeckElement, i8>) -> Self {
        OrientationChoice {
            scope: OrientationScope::PerClass,
            default_sign: 1,
            table: table.into_iter().map(|(k, v)| (k, normalize(v))).collect(),
        }
    }

    pub fn scope(&self) -> OrientationScope {
        self.scope
    }

    pub fn default_sign(&self) -> i8 {
        self.default_sign
    }

    pub fn table(&self) -> &BTreeMap<DeckElement, i8> {
        &self.table
    }

    pub fn sign_for(&self, class_rep: &DeckElement) -> i8 {
        match self.scope {
            OrientationScope::Global => self.default_sign,
            OrientationScope::PerClass => *self.table.get(class_rep).unwrap_or(&self.default_sign),
        }
    }

    pub fn with_class(mut self, class_rep: DeckElement, sign: i8) -> Self {
        self.table.insert(class_rep, normalize(sign));
        self
    }

    /// Every sign flipped, including the default for unlisted classes.
    pub fn negate(&self) -> Self {
        OrientationChoice {
            scope: self.scope,
            default_sign: -self.default_sign,
            table: self.table.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

fn normalize(sign: i8) -> i8 {
    if sign < 0 {
        -1
    } else {
        1
    }
}

/// The orientation fixed by one sign at one class.
///
/// In global scope `g` must be orientation true and the result is the constant table; there
/// are exactly two such tables. In per-class scope the base class gets `sign` and every other
/// class the default `+1`.
pub fn coherent_orientation(
    g_hom: &InducedHom,
    scope: OrientationScope,
    base_class: Option<&DeckElement>,
    sign: i8,
) -> Result<OrientationChoice> {
    match scope {
        OrientationScope::Global => {
            if !g_hom.is_orientation_true() {
                return Err(Error::NotOrientationTrue(format!(
                    "global orientation needs χ_N(g_#(γ)) = χ_M(γ) for all γ; g_# is {g_hom}"
                )));
            }
            Ok(OrientationChoice::global(sign))
        }
        OrientationScope::PerClass => {
            let mut table = BTreeMap::new();
            if let Some(c) = base_class {
                table.insert(c.clone(), sign);
            }
            Ok(OrientationChoice::per_class(table))
        }
    }
}

pub fn negate(o: &OrientationChoice) -> OrientationChoice {
    o.negate()
}

/// Carries `o` to the far end of a pair of admissible homotopies.
///
/// The homs stay fixed along the homotopies, so surviving classes keep their signs; classes
/// that first appear at the far end (listed in `end_records`) get the default `+1`.
pub fn transport_through_homotopy(
    o: &OrientationChoice,
    hf: &AdmissibleHomotopy,
    hg: &AdmissibleHomotopy,
    end_records: &[CoincidenceRecord],
) -> Result<OrientationChoice> {
    if hf.start().hom() != hf.end().hom() || hg.start().hom() != hg.end().hom() {
        return Err(Error::NotAdmissible("homotopy changes the induced homomorphism".into()));
    }
    if hf.region() != hg.region() {
        return Err(Error::NotAdmissible("homotopies are certified on different regions".into()));
    }
    let mut out = o.clone();
    if out.scope == OrientationScope::PerClass {
        for r in end_records {
            out.table.entry(r.class_rep.clone()).or_insert(1);
        }
    }
    Ok(out)
}

/// The orientation for the swapped pair `(g, f)` that matches `o` for `(f, g)`.
///
/// A coincidence with `g̃ = α f̃` has `f̃ = α^-1 g̃`, and
/// `det(Jf − A Jg) = (−1)^n χ_N(α) det(Jg − A Jf)`. The class of `α^-1` therefore gets
/// `σ(α) χ_N(α)`, corrected by both alignments; swapping then multiplies the index by `(−1)^n`.
/// Meaningful when both homomorphisms are orientation true, so that `χ_N` is constant on classes.
pub fn swapped_orientation(
    o: &OrientationChoice,
    records: &[CoincidenceRecord],
    swapped: &TwistedPair,
) -> OrientationChoice {
    let tgt = swapped.target();
    if o.scope == OrientationScope::Global && tgt.is_orientable() {
        return o.clone();
    }
    let mut table = BTreeMap::new();
    for r in records {
        let inv = tgt.inverse(&r.class_element);
        let rep = swapped.canonical(&inv);
        let w = swapped
            .same_class(&rep, &inv)
            .map_or(1, |gamma| swapped.alignment(&gamma));
        let s = o.sign_for(&r.class_rep) * tgt.character(&r.class_element) * r.alignment * w;
        table.insert(rep, s);
    }
    OrientationChoice::per_class(table)
}

/// `sign(det Jg)` at the canonical lift of the record, aligned to its class representative and
/// multiplied by the class sign of `o`.
pub fn sign_of_embedding(
    g: &EquivariantLift,
    record: &CoincidenceRecord,
    o: &OrientationChoice,
) -> Result<i8> {
    let x = record.lift_f64(g.source());
    let det = det_f64(&g.jacobian(&x));
    if det.abs() <= 1e-12 {
        return Err(Error::SingularJacobian(format!("det Jg = {det:.3e} at {x:?}")));
    }
    let s = if det > 0.0 { 1 } else { -1 };
    Ok(s * record.alignment * o.sign_for(&record.class_rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat_space::FlatManifold;

    #[test]
    fn exactly_two_global_orientations() {
        let t = FlatManifold::torus(2);
        let id = InducedHom::from_matrix(t.clone(), t, &[vec![1, 0], vec![0, 1]]).unwrap();
        let outs: std::collections::HashSet<_> = [1, -1]
            .iter()
            .map(|&s| coherent_orientation(&id, OrientationScope::Global, None, s).unwrap())
            .collect();
        assert_eq!(outs.len(), 2);
    }

    #[test]
    fn global_needs_orientation_true() {
        let k = FlatManifold::klein_bottle();
        let kill = InducedHom::new(
            k.clone(),
            k,
            vec![
                DeckElement::translation(vec![2, 0]),
                DeckElement::translation(vec![0, 0]),
                DeckElement::translation(vec![1, 0]),
            ],
        )
        .unwrap();
        assert!(matches!(
            coherent_orientation(&kill, OrientationScope::Global, None, 1),
            Err(Error::NotOrientationTrue(_))
        ));
    }

    #[test]
    fn negate_flips_table() {
        let c1 = DeckElement::translation(vec![0]);
        let c2 = DeckElement::translation(vec![1]);
        let o = OrientationChoice::per_class(BTreeMap::from([(c1.clone(), 1), (c2.clone(), -1)]));
        let n = o.negate();
        assert_eq!(n.sign_for(&c1), -1);
        assert_eq!(n.sign_for(&c2), 1);
        assert_eq!(n.negate(), o);
        assert_eq!(OrientationChoice::global(1).negate(), OrientationChoice::global(-1));
    }
}
