//! Seeded random instances for property checks.

use rand::Rng;

use crate::coincidence_solver::{CoincidenceSolver, SolverOptions};
use crate::equivariant_map::{affine_family, random_equivariant_term, EquivariantLift, InducedHom};
use crate::flat_space::{DeckElement, FlatManifold};
use crate::lattice::{det_int, IntMat, IntVec};
use crate::rational::{QVec, Q};

pub fn random_int_matrix<R: Rng>(rng: &mut R, n: usize, bound: i64) -> Vec<IntVec> {
    (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-bound..=bound)).collect())
        .collect()
}

pub fn det_of(rows: &[IntVec]) -> i64 {
    det_int(&IntMat::from_rows(rows))
}

fn random_offset<R: Rng>(rng: &mut R, n: usize) -> QVec {
    (0..n).map(|_| Q::new(rng.random_range(0..16), 16)).collect()
}

/// Affine torus pair with `det(B − A) ≠ 0`; returns `(f, g, A, B)`.
pub fn random_torus_pair<R: Rng>(
    rng: &mut R,
    n: usize,
    bound: i64,
) -> (EquivariantLift, EquivariantLift, Vec<IntVec>, Vec<IntVec>) {
    loop {
        let a = random_int_matrix(rng, n, bound);
        let b = random_int_matrix(rng, n, bound);
        let d: Vec<IntVec> = b
            .iter()
            .zip(&a)
            .map(|(rb, ra)| rb.iter().zip(ra).map(|(x, y)| x - y).collect())
            .collect();
        if det_of(&d) == 0 {
            continue;
        }
        let (f, g) = crate::instances::torus_pair(&a, &b, random_offset(rng, n), random_offset(rng, n))
            .expect("integer matrices give valid torus maps");
        return (f, g, a, b);
    }
}

fn random_deck<R: Rng>(rng: &mut R, glide: bool, bound: i64) -> DeckElement {
    let eps = if glide { rng.random_range(0..2u8) } else { 0 };
    DeckElement::new(eps, vec![rng.random_range(-bound..=bound), rng.random_range(-bound..=bound)])
}

/// Random endomorphism of the Klein bottle group, by rejection on the relations.
pub fn random_klein_hom<R: Rng>(rng: &mut R, bound: i64) -> InducedHom {
    let k = FlatManifold::klein_bottle();
    loop {
        // φ(e1) = φ(g)² is forced by g² = e1
        let phi_g = random_deck(rng, true, bound);
        let phi_e2 = random_deck(rng, true, bound);
        let images = vec![k.compose(&phi_g, &phi_g), phi_e2, phi_g];
        if let Ok(h) = InducedHom::new(k.clone(), k.clone(), images) {
            return h;
        }
    }
}

/// Random orientation-true endomorphism of the Klein bottle group.
pub fn random_orientation_true_klein_hom<R: Rng>(rng: &mut R, bound: i64) -> InducedHom {
    loop {
        let h = random_klein_hom(rng, bound);
        if h.is_orientation_true() {
            return h;
        }
    }
}

/// An affine lift of `hom` with random coefficients along the homogeneous solutions.
pub fn random_affine_lift<R: Rng>(rng: &mut R, hom: &InducedHom) -> EquivariantLift {
    let ((l0, v0), homog) = affine_family(hom).expect("every hom between these groups has an affine lift");
    let mut l = l0;
    let mut v = v0;
    for (hl, hv) in homog {
        let c = Q::new(rng.random_range(-8..=8), 8);
        l = l.add(&hl.scale(c));
        v = v.iter().zip(&hv).map(|(a, b)| a + b * c).collect();
    }
    EquivariantLift::affine(hom.clone(), l, v).expect("affine family members are equivariant")
}

/// A Klein bottle pair whose affine coincidence equations are nonsingular on both sheets.
pub fn random_klein_pair<R: Rng>(
    rng: &mut R,
    orientation_true: bool,
    bound: i64,
) -> (EquivariantLift, EquivariantLift) {
    loop {
        let (hf, hg) = if orientation_true {
            (
                random_orientation_true_klein_hom(rng, bound),
                random_orientation_true_klein_hom(rng, bound),
            )
        } else {
            (random_klein_hom(rng, bound), random_klein_hom(rng, bound))
        };
        let f = random_affine_lift(rng, &hf);
        let g = random_affine_lift(rng, &hg);
        let solver = CoincidenceSolver::new(&f, &g, SolverOptions::default()).expect("same manifolds");
        if solver.is_nonsingular_affine() {
            return (f, g);
        }
    }
}

/// `lift` plus up to `count` random equivariant terms with amplitudes below `scale`.
pub fn perturb<R: Rng>(rng: &mut R, lift: &EquivariantLift, count: usize, scale: f64) -> EquivariantLift {
    let mut terms = lift.terms().to_vec();
    for _ in 0..count {
        if let Some(t) = random_equivariant_term(lift.hom(), rng, scale) {
            terms.push(t);
        }
    }
    lift.with_terms(terms).expect("random terms are equivariant")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn klein_homs_are_found_quickly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut saw_glide_image = false;
        for _ in 0..20 {
            let h = random_klein_hom(&mut rng, 3);
            saw_glide_image |= h.images()[2].eps == 1;
        }
        assert!(saw_glide_image);
        for _ in 0..5 {
            let (f, g) = random_klein_pair(&mut rng, true, 3);
            assert!(f.hom().is_orientation_true() && g.hom().is_orientation_true());
        }
    }
}
