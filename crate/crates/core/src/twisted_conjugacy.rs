//! Reidemeister classes of a pair of deck-group homomorphisms.
//!
//! The twisted action of `γ ∈ Γ_M` on `α ∈ Γ_N` is `γ·α = g_#(γ) α f_#(γ)^-1`. Let `K` be the
//! finite-index normal subgroup of lattice translations `(0, m)` whose images under both homs
//! are translations. On `K` both homs are linear, `f_#(0, Bc) = (0, Fc)` and
//! `g_#(0, Bc) = (0, Gc)` in a basis `B` of `K`, and
//!
//! ```text
//! (0, Bc)·(e, k) = (e, k + (G - D^e F) c)
//! ```
//!
//! so the `K`-orbits on the `eps = e` sheet are cosets of the lattice `Λ_e` spanned by the
//! columns of `G - D^e F`. A full class is the union of the `K`-orbits of `q·α` over coset
//! representatives `q` of `Γ_M / K` (at most eight of them).

use std::collections::BTreeSet;

use crate::equivariant_map::InducedHom;
use crate::error::{Error, Result};
use crate::flat_space::{DeckElement, FlatManifold};
use crate::lattice::{smith_normal_form, IntMat, IntVec, Lattice, SmithForm};

/// The class set of a hom pair; representatives are listed only when the set is finite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReidemeisterClassSet {
    pub finite: bool,
    pub representatives: Vec<DeckElement>,
    pub degenerate_flags: Vec<bool>,
}

impl ReidemeisterClassSet {
    pub fn count(&self) -> Option<usize> {
        self.finite.then_some(self.representatives.len())
    }
}

#[derive(Debug, Clone)]
struct Sheet {
    lattice: Lattice,
    smith: SmithForm,
}

/// Precomputed twisted-conjugacy data for `(f_#, g_#)`.
#[derive(Debug, Clone)]
pub struct TwistedPair {
    f: InducedHom,
    g: InducedHom,
    k_basis: IntMat,
    cosets: Vec<DeckElement>,
    sheets: Vec<Sheet>,
}

impl TwistedPair {
    pub fn new(f: &InducedHom, g: &InducedHom) -> Result<Self> {
        if f.source() != g.source() || f.target() != g.target() {
            return Err(Error::UnsupportedGroupPair(
                "f_# and g_# must share source and target groups".into(),
            ));
        }
        let src = f.source();
        let tgt = f.target();
        if src.dim() != tgt.dim() {
            return Err(Error::UnsupportedGroupPair(format!(
                "source dimension {} differs from target dimension {}",
                src.dim(),
                tgt.dim()
            )));
        }
        let n = src.dim();
        let parity = |x: &DeckElement| -> (u8, u8, u8) {
            (x.eps, f.apply(x).eps, g.apply(x).eps)
        };

        // K: lattice vectors with even parity against both homs
        let mut gens: Vec<IntVec> = (0..n)
            .map(|i| {
                let mut v = vec![0; n];
                v[i] = 2;
                v
            })
            .collect();
        let corners = binary_vectors(n);
        for r in &corners {
            if parity(&DeckElement::translation(r.clone())) == (0, 0, 0) {
                gens.push(r.clone());
            }
        }
        let k_lattice = Lattice::from_generators(n, &gens);
        let k_basis = IntMat::from_columns(k_lattice.basis(), n);

        // Γ_M / K
        let mut cosets: Vec<DeckElement> = Vec::new();
        let mut seen = BTreeSet::new();
        let eps_values: &[u8] = if src.is_glide() { &[0, 1] } else { &[0] };
        for &e in eps_values {
            for r in &corners {
                let q = DeckElement::new(e, r.clone());
                if seen.insert(parity(&q)) {
                    cosets.push(q);
                }
            }
        }

        let mut f_cols = Vec::with_capacity(n);
        let mut g_cols = Vec::with_capacity(n);
        for j in 0..n {
            let b = DeckElement::translation(k_basis.column(j));
            let (fb, gb) = (f.apply(&b), g.apply(&b));
            debug_assert!(fb.eps == 0 && gb.eps == 0);
            f_cols.push(fb.k);
            g_cols.push(gb.k);
        }
        let sheet_count = if tgt.is_glide() { 2 } else { 1 };
        let sheets = (0..sheet_count)
            .map(|e| {
                let d = tgt.linear_diag(e as u8);
                let mut m = IntMat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = g_cols[j][i] - d[i] as i64 * f_cols[j][i];
                    }
                }
                Sheet {
                    lattice: Lattice::column_span(&m),
                    smith: smith_normal_form(&m),
                }
            })
            .collect();
        Ok(TwistedPair {
            f: f.clone(),
            g: g.clone(),
            k_basis,
            cosets,
            sheets,
        })
    }

    pub fn f_hom(&self) -> &InducedHom {
        &self.f
    }

    pub fn g_hom(&self) -> &InducedHom {
        &self.g
    }

    pub fn source(&self) -> &FlatManifold {
        self.f.source()
    }

    pub fn target(&self) -> &FlatManifold {
        self.f.target()
    }

    /// `g_#(γ) α f_#(γ)^-1`.
    pub fn act(&self, gamma: &DeckElement, alpha: &DeckElement) -> DeckElement {
        let t = self.target();
        t.compose(
            &t.compose(&self.g.apply(gamma), alpha),
            &t.inverse(&self.f.apply(gamma)),
        )
    }

    /// `χ_M(γ) χ_N(g_#(γ))`: `-1` exactly on elements whose characters disagree.
    pub fn alignment(&self, gamma: &DeckElement) -> i8 {
        self.source().character(gamma) * self.target().character(&self.g.apply(gamma))
    }

    /// Least element of the class of `alpha` under the canonical order.
    pub fn canonical(&self, alpha: &DeckElement) -> DeckElement {
        self.cosets
            .iter()
            .map(|q| {
                let b = self.act(q, alpha);
                let k = self.sheets[b.eps as usize].lattice.reduce(&b.k);
                DeckElement::new(b.eps, k)
            })
            .min()
            .expect("identity coset is always present")
    }

    /// `γ` with `alpha = g_#(γ) beta f_#(γ)^-1`, if one exists.
    pub fn same_class(&self, alpha: &DeckElement, beta: &DeckElement) -> Option<DeckElement> {
        let s = self.source();
        for q in &self.cosets {
            let b = self.act(q, beta);
            if b.eps != alpha.eps {
                continue;
            }
            let diff: IntVec = alpha.k.iter().zip(&b.k).map(|(x, y)| x - y).collect();
            if let Some(c) = self.sheets[b.eps as usize].smith.solve(&diff) {
                let kappa = DeckElement::translation(self.k_basis.mul_vec(&c));
                let gamma = s.compose(&kappa, q);
                assert_eq!(&self.act(&gamma, beta), alpha, "witness failed re-verification");
                return Some(gamma);
            }
        }
        None
    }

    /// A stabilizer element of `alpha` whose source and image characters disagree.
    pub fn degeneracy_witness(&self, alpha: &DeckElement) -> Option<DeckElement> {
        // the sign mismatch is trivial on K, so only the coset representative matters
        self.cosets
            .iter()
            .filter(|q| self.alignment(q) == -1)
            .find_map(|q| {
                let b = self.act(q, alpha);
                if b.eps != alpha.eps {
                    return None;
                }
                let diff: IntVec = alpha.k.iter().zip(&b.k).map(|(x, y)| x - y).collect();
                let c = self.sheets[b.eps as usize].smith.solve(&diff)?;
                let kappa = DeckElement::translation(self.k_basis.mul_vec(&c));
                Some(self.source().compose(&kappa, q))
            })
    }

    pub fn is_degenerate(&self, alpha: &DeckElement) -> bool {
        self.degeneracy_witness(alpha).is_some()
    }

    /// Finite iff every sheet lattice has full rank.
    pub fn is_finite(&self) -> bool {
        self.sheets.iter().all(|s| s.lattice.is_full_rank())
    }

    pub fn classes(&self) -> ReidemeisterClassSet {
        if !self.is_finite() {
            return ReidemeisterClassSet {
                finite: false,
                representatives: Vec::new(),
                degenerate_flags: Vec::new(),
            };
        }
        let mut reps = BTreeSet::new();
        for (e, sheet) in self.sheets.iter().enumerate() {
            for k in sheet.lattice.coset_representatives().expect("full rank") {
                reps.insert(self.canonical(&DeckElement::new(e as u8, k)));
            }
        }
        let representatives: Vec<DeckElement> = reps.into_iter().collect();
        let degenerate_flags = representatives.iter().map(|a| self.is_degenerate(a)).collect();
        ReidemeisterClassSet {
            finite: true,
            representatives,
            degenerate_flags,
        }
    }
}

pub fn reidemeister_classes(f: &InducedHom, g: &InducedHom) -> Result<ReidemeisterClassSet> {
    Ok(TwistedPair::new(f, g)?.classes())
}

pub fn same_class(
    alpha: &DeckElement,
    beta: &DeckElement,
    f: &InducedHom,
    g: &InducedHom,
) -> Result<Option<DeckElement>> {
    Ok(TwistedPair::new(f, g)?.same_class(alpha, beta))
}

pub fn is_degenerate_class(alpha: &DeckElement, f: &InducedHom, g: &InducedHom) -> Result<bool> {
    Ok(TwistedPair::new(f, g)?.is_degenerate(alpha))
}

fn binary_vectors(n: usize) -> Vec<IntVec> {
    (0..1u32 << n)
        .map(|mask| (0..n).map(|i| ((mask >> i) & 1) as i64).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(a: i64, b: i64) -> TwistedPair {
        let c = FlatManifold::torus(1);
        let f = InducedHom::from_matrix(c.clone(), c.clone(), &[vec![a]]).unwrap();
        let g = InducedHom::from_matrix(c.clone(), c, &[vec![b]]).unwrap();
        TwistedPair::new(&f, &g).unwrap()
    }

    fn t(k: &[i64]) -> DeckElement {
        DeckElement::translation(k.to_vec())
    }

    #[test]
    fn circle_three_vs_one() {
        let p = circle(3, 1);
        let cs = p.classes();
        assert_eq!(cs.representatives, vec![t(&[0]), t(&[1])]);
        assert_eq!(cs.degenerate_flags, vec![false, false]);
        let w = p.same_class(&t(&[0]), &t(&[2])).unwrap();
        assert_eq!(w, t(&[1]));
        assert!(p.same_class(&t(&[0]), &t(&[1])).is_none());
        assert_eq!(p.canonical(&t(&[-7])), t(&[1]));
    }

    #[test]
    fn torus_diag_two_three() {
        let tor = FlatManifold::torus(2);
        let f = InducedHom::from_matrix(tor.clone(), tor.clone(), &[vec![0, 0], vec![0, 0]]).unwrap();
        let g = InducedHom::from_matrix(tor.clone(), tor, &[vec![2, 0], vec![0, 3]]).unwrap();
        assert_eq!(reidemeister_classes(&f, &g).unwrap().count(), Some(6));
        assert!(!reidemeister_classes(&g, &g).unwrap().finite);
    }

    #[test]
    fn klein_identity_against_kill_map() {
        let k = FlatManifold::klein_bottle();
        let id = InducedHom::new(k.clone(), k.clone(), k.generators()).unwrap();
        let kill = InducedHom::new(
            k.clone(),
            k.clone(),
            vec![t(&[2, 0]), t(&[0, 0]), t(&[1, 0])],
        )
        .unwrap();
        let p = TwistedPair::new(&id, &kill).unwrap();
        for e in 0..2u8 {
            for a in -3..=3 {
                for b in -3..=3 {
                    assert!(!p.is_degenerate(&DeckElement::new(e, vec![a, b])));
                }
            }
        }
    }

    mod props {
        use super::*;
        use crate::generators::random_klein_hom;
        use proptest::prelude::*;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        fn klein_pair(seed: u64) -> TwistedPair {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_klein_hom(&mut rng, 3);
            let g = random_klein_hom(&mut rng, 3);
            TwistedPair::new(&f, &g).unwrap()
        }

        fn deck() -> impl Strategy<Value = DeckElement> {
            (0u8..=1, proptest::collection::vec(-5i64..=5, 2)).prop_map(|(e, k)| DeckElement::new(e, k))
        }

        proptest! {
            #[test]
            fn same_class_is_an_equivalence(seed in any::<u64>(), a in deck(), b in deck(), c in deck(), g in deck()) {
                let p = klein_pair(seed);
                let k = p.target();
                // reflexive, and the orbit of an action
                prop_assert!(p.same_class(&a, &a).is_some());
                let moved = p.act(&g, &a);
                let w = p.same_class(&moved, &a);
                prop_assert!(w.is_some());
                prop_assert_eq!(p.act(&w.unwrap(), &a), moved.clone());
                // symmetric
                prop_assert_eq!(p.same_class(&a, &b).is_some(), p.same_class(&b, &a).is_some());
                // transitive
                if p.same_class(&a, &b).is_some() && p.same_class(&b, &c).is_some() {
                    prop_assert!(p.same_class(&a, &c).is_some());
                }
                // canonical representatives decide membership
                prop_assert_eq!(p.canonical(&a) == p.canonical(&b), p.same_class(&a, &b).is_some());
                prop_assert_eq!(p.canonical(&moved), p.canonical(&a));
                // the action is a left action
                let h = DeckElement::new(0, vec![1, -2]);
                prop_assert_eq!(p.act(&p.source().compose(&g, &h), &a), p.act(&g, &p.act(&h, &a)));
                prop_assert!(k.contains(&moved));
            }

            #[test]
            fn degeneracy_is_a_class_property(seed in any::<u64>(), a in deck(), g in deck()) {
                let p = klein_pair(seed);
                prop_assert_eq!(p.is_degenerate(&a), p.is_degenerate(&p.act(&g, &a)));
                if let Some(w) = p.degeneracy_witness(&a) {
                    prop_assert_eq!(p.act(&w, &a), a.clone());
                    prop_assert_eq!(p.alignment(&w), -1);
                }
            }
        }
    }
}
