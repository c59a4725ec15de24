//! Ready-made problem instances with known coincidence sets.

use std::f64::consts::PI;

use num_traits::Zero;

use crate::equivariant_map::{EquivariantLift, InducedHom, TrigTerm};
use crate::error::Result;
use crate::flat_space::{DeckElement, FlatManifold, OpenBox, OpenRegion};
use crate::lattice::IntVec;
use crate::rational::{q, qr, to_f64, QMat, QVec, Q};

/// Affine lifts `x ↦ A x + v_f` and `x ↦ B x + v_g` on the `n`-torus.
pub fn torus_pair(a: &[IntVec], b: &[IntVec], vf: QVec, vg: QVec) -> Result<(EquivariantLift, EquivariantLift)> {
    let t = FlatManifold::torus(a.len());
    let hf = InducedHom::from_matrix(t.clone(), t.clone(), a)?;
    let hg = InducedHom::from_matrix(t.clone(), t, b)?;
    Ok((
        EquivariantLift::affine(hf, QMat::from_int_rows(a), vf)?,
        EquivariantLift::affine(hg, QMat::from_int_rows(b), vg)?,
    ))
}

/// `x ↦ a x` against `x ↦ b x` on the circle.
pub fn circle_pair(a: i64, b: i64) -> (EquivariantLift, EquivariantLift) {
    torus_pair(&[vec![a]], &[vec![b]], vec![q(0)], vec![q(0)]).expect("circle maps are valid")
}

/// The Klein bottle `K` mapped to `T²` with both maps inducing the same homomorphism, so that
/// every class is degenerate.
///
/// `f̃ = Lx + v` and `g̃ = Lx + v − (0, c) + δ(x)` with
/// `δ(x) = (ρ cos 2πx₂, ρ sin 4πx₁)`. For `0 < c < ρ < 1/2` the coincidences in the
/// fundamental domain are `x₂ ∈ {1/4, 3/4}`, `x₁ ∈ {a, 1/4 − a}` with
/// `a = arcsin(c/ρ) / 4π`, all in the class of the identity. Raising `c` above `ρ` merges the
/// points pairwise and removes them.
#[derive(Debug, Clone, PartialEq)]
pub struct KleinFold {
    pub rho: Q,
    pub c: Q,
    /// Whether the lifts fold `K` onto `T²` (`x₁ ↦ 2x₁`) or are constant along `x`.
    pub folding: bool,
}

impl KleinFold {
    pub fn new(rho: Q, c: Q) -> Self {
        KleinFold { rho, c, folding: true }
    }

    /// The same points, with `f` constant and the homomorphism trivial.
    pub fn constant(rho: Q, c: Q) -> Self {
        KleinFold { rho, c, folding: false }
    }

    pub fn hom(&self) -> InducedHom {
        let k = FlatManifold::klein_bottle();
        let s = if self.folding { 1 } else { 0 };
        let images = vec![
            DeckElement::translation(vec![2 * s, 0]),
            DeckElement::translation(vec![0, 0]),
            DeckElement::translation(vec![s, 0]),
        ];
        InducedHom::new(k, FlatManifold::torus(2), images).expect("folding hom is valid")
    }

    fn linear(&self) -> QMat {
        let s = if self.folding { 2 } else { 0 };
        QMat::from_int_rows(&[vec![s, 0], vec![0, 0]])
    }

    fn base_offset() -> QVec {
        vec![qr(1, 8), qr(3, 8)]
    }

    pub fn f(&self) -> EquivariantLift {
        EquivariantLift::affine(self.hom(), self.linear(), Self::base_offset()).expect("equivariant")
    }

    pub fn g(&self) -> EquivariantLift {
        let v = Self::base_offset();
        let terms = vec![
            TrigTerm::new(vec![self.rho, Q::zero()], vec![0, 1], qr(1, 4)),
            TrigTerm::new(vec![Q::zero(), self.rho], vec![2, 0], q(0)),
        ];
        EquivariantLift::new(self.hom(), self.linear(), vec![v[0], v[1] - self.c], terms).expect("equivariant")
    }

    pub fn with_c(&self, c: Q) -> Self {
        KleinFold { c, ..self.clone() }
    }

    /// `arcsin(c/ρ) / 4π`.
    pub fn a(&self) -> f64 {
        (to_f64(&self.c) / to_f64(&self.rho)).asin() / (4.0 * PI)
    }

    /// The four coincidences in the fundamental domain, from the closed form.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let a = self.a();
        let mut pts = vec![[a, 0.25], [0.25 - a, 0.25], [a, 0.75], [0.25 - a, 0.75]];
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts
    }

    /// A box holding exactly the two points on `x₂ = 1/4`, valid for every `c ≤ 3ρ/2`.
    pub fn pair_region() -> OpenRegion {
        OpenRegion::Boxes(vec![pair_box()])
    }

    /// [`KleinFold::pair_region`] plus a small cube around `(a, 3/4)`.
    pub fn triple_region(&self) -> OpenRegion {
        let a = crate::rational::dyadic(self.a(), 20);
        OpenRegion::Boxes(vec![pair_box(), OpenBox::cube(&[a, qr(3, 4)], qr(1, 64))])
    }

    /// A chart around `(a, 1/4)`.
    pub fn chart_box(&self) -> OpenBox {
        let a = crate::rational::dyadic(self.a(), 20);
        OpenBox::cube(&[a, qr(1, 4)], qr(1, 64))
    }
}

fn pair_box() -> OpenBox {
    OpenBox::new(vec![qr(-1, 20), qr(1, 10)], vec![qr(3, 10), qr(2, 5)]).expect("valid box")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coincidence_solver::{CoincidenceSolver, SolverOptions};
    use crate::flat_space::DomainMarker;

    #[test]
    fn klein_fold_points_match_closed_form() {
        let fam = KleinFold::new(qr(1, 10), qr(1, 20));
        let solver = CoincidenceSolver::new(&fam.f(), &fam.g(), SolverOptions::default()).unwrap();
        let recs = solver.find(&OpenRegion::Full, &DomainMarker::Full).unwrap();
        let mut got: Vec<[f64; 2]> = recs
            .iter()
            .map(|r| {
                let x = r.point.to_f64();
                [x[0], x[1]]
            })
            .collect();
        got.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(got.len(), 4);
        for (p, e) in got.iter().zip(fam.points()) {
            assert!((p[0] - e[0]).abs() < 1e-9 && (p[1] - e[1]).abs() < 1e-9, "{p:?} vs {e:?}");
        }
        assert!(recs.iter().all(|r| r.degenerate && r.class_rep.is_identity()));
    }
}
