//! Maps between flat manifolds given by equivariant lifts `R^n → R^n`.
//!
//! A lift has the form `x ↦ L x + v + Σ a sin(2π(⟨m, x⟩ + p))` with rational `L`, `v`,
//! amplitudes `a`, phases `p` (in turns) and integer frequencies `m`. Equivariance with
//! respect to an induced homomorphism `φ` means `f̃(γ x) = φ(γ) f̃(x)`.

use std::f64::consts::TAU;
use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::flat_space::{DeckElement, FlatManifold};
use crate::lattice::IntVec;
pub use crate::homotopy::AdmissibleHomotopy;
use crate::rational::{dyadic, format_q, q, to_f64, vec_to_f64, QMat, QVec, Q};

/// Homomorphism between deck groups, given on generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InducedHom {
    source: FlatManifold,
    target: FlatManifold,
    images: Vec<DeckElement>,
}

impl InducedHom {
    /// `images` lists the images of `e_1..e_n` and then of the glide (when the source has one).
    pub fn new(source: FlatManifold, target: FlatManifold, images: Vec<DeckElement>) -> Result<Self> {
        let expected = source.generators().len();
        if images.len() != expected {
            return Err(Error::InvalidHom(format!(
                "expected {expected} generator images, got {}",
                images.len()
            )));
        }
        if let Some(bad) = images.iter().find(|g| !target.contains(g)) {
            return Err(Error::InvalidHom(format!("{bad} is not a deck element of the target")));
        }
        let hom = InducedHom { source, target, images };
        hom.check_relations()?;
        Ok(hom)
    }

    /// Torus hom `e_j ↦ (0, column j of b)`.
    pub fn from_matrix(source: FlatManifold, target: FlatManifold, b: &[IntVec]) -> Result<Self> {
        let n = source.dim();
        if b.len() != target.dim() || b.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidHom("matrix shape does not match the manifolds".into()));
        }
        let mut images: Vec<DeckElement> = (0..n)
            .map(|j| DeckElement::translation(b.iter().map(|r| r[j]).collect()))
            .collect();
        if source.is_glide() {
            return Err(Error::InvalidHom("a glide source needs an explicit glide image".into()));
        }
        images.truncate(n);
        Self::new(source, target, images)
    }

    fn check_relations(&self) -> Result<()> {
        let n = self.source.dim();
        let t = &self.target;
        let lat = &self.images[..n];
        for i in 0..n {
            for j in (i + 1)..n {
                if t.compose(&lat[i], &lat[j]) != t.compose(&lat[j], &lat[i]) {
                    return Err(Error::InvalidHom(format!(
                        "images of e{} and e{} do not commute",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if let Some(g) = self.source.glide() {
            let phi_g = &self.images[n];
            for j in 0..n {
                let lhs = t.conjugate(phi_g, &lat[j]);
                let rhs = t.pow(&lat[j], g.linear[j] as i64);
                if lhs != rhs {
                    return Err(Error::InvalidHom(format!(
                        "φ(g) φ(e{0}) φ(g)^-1 = {lhs} but φ(e{0})^{1} = {rhs}",
                        j + 1,
                        g.linear[j]
                    )));
                }
            }
            let sq = self.source.compose(
                &self.source.glide_generator().unwrap(),
                &self.source.glide_generator().unwrap(),
            );
            let lhs = t.compose(phi_g, phi_g);
            let rhs = self.apply(&sq);
            if lhs != rhs {
                return Err(Error::InvalidHom(format!("φ(g)² = {lhs} but φ(g²) = {rhs}")));
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &FlatManifold {
        &self.source
    }

    pub fn target(&self) -> &FlatManifold {
        &self.target
    }

    pub fn images(&self) -> &[DeckElement] {
        &self.images
    }

    pub fn apply(&self, g: &DeckElement) -> DeckElement {
        let t = &self.target;
        let mut acc = t.identity();
        for (i, &k) in g.k.iter().enumerate() {
            if k != 0 {
                acc = t.compose(&acc, &t.pow(&self.images[i], k));
            }
        }
        if g.eps == 1 {
            acc = t.compose(&acc, &self.images[self.source.dim()]);
        }
        acc
    }

    /// `χ_N(φ(γ)) = χ_M(γ)` on every generator.
    pub fn is_orientation_true(&self) -> bool {
        self.source
            .generators()
            .iter()
            .zip(&self.images)
            .all(|(g, img)| self.source.character(g) == self.target.character(img))
    }

    /// Integer matrix of the hom on the lattice when every lattice image is a translation.
    pub fn lattice_matrix(&self) -> Option<Vec<IntVec>> {
        let n = self.source.dim();
        if self.images[..n].iter().any(|g| g.eps != 0) {
            return None;
        }
        Some(
            (0..self.target.dim())
                .map(|i| (0..n).map(|j| self.images[j].k[i]).collect())
                .collect(),
        )
    }
}

impl fmt::Display for InducedHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .source
            .generators()
            .iter()
            .zip(&self.images)
            .map(|(g, img)| format!("{g} ↦ {img}"))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// One perturbation term `amplitude · sin(2π(⟨frequency, x⟩ + phase))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrigTerm {
    pub amplitude: QVec,
    pub frequency: IntVec,
    /// In turns.
    pub phase: Q,
}

impl TrigTerm {
    pub fn new(amplitude: QVec, frequency: IntVec, phase: Q) -> Self {
        TrigTerm { amplitude, frequency, phase }
    }

    fn scaled(&self, s: Q) -> TrigTerm {
        TrigTerm {
            amplitude: self.amplitude.iter().map(|a| a * s).collect(),
            ..self.clone()
        }
    }

    fn is_zero(&self) -> bool {
        self.amplitude.iter().all(Zero::is_zero)
            || (self.frequency.iter().all(|&m| m == 0) && (self.phase * q(2)).is_integer())
    }
}

/// Sign `λ` with `δ(γ x) = λ δ(x)` for a single term under a deck element with linear
/// diagonal `a` and translation `c`; `None` when the term transforms into something else.
fn term_multiplier(term: &TrigTerm, a: &[i8], c: &[Q]) -> Option<i8> {
    let m = &term.frequency;
    let am: IntVec = m.iter().zip(a).map(|(&mi, &ai)| mi * ai as i64).collect();
    let mc: Q = m.iter().zip(c).map(|(&mi, ci)| q(mi as i128) * ci).sum();
    let half = Q::new(1, 2);
    if m.iter().all(|&x| x == 0) {
        return Some(1);
    }
    if &am == m {
        let twice = mc * q(2);
        if !twice.is_integer() {
            return None;
        }
        return Some(if twice.to_integer().rem_euclid(2) == 0 { 1 } else { -1 });
    }
    if am.iter().zip(m).all(|(x, y)| *x == -y) {
        let s = (term.phase * q(2) + mc).fract();
        let s = if s < Q::zero() { s + Q::one() } else { s };
        if s == half {
            return Some(1);
        }
        if s.is_zero() {
            return Some(-1);
        }
    }
    None
}

#[derive(Debug, Clone)]
struct FloatTerm {
    amplitude: Vec<f64>,
    frequency: Vec<f64>,
    phase: f64,
}

/// An equivariant lift `f̃ : R^n → R^n` of a map between flat manifolds.
#[derive(Debug, Clone)]
pub struct EquivariantLift {
    hom: InducedHom,
    linear: QMat,
    offset: QVec,
    terms: Vec<TrigTerm>,
    linear_f: Vec<Vec<f64>>,
    offset_f: Vec<f64>,
    terms_f: Vec<FloatTerm>,
}

impl PartialEq for EquivariantLift {
    fn eq(&self, other: &Self) -> bool {
        self.hom == other.hom
            && self.linear == other.linear
            && self.offset == other.offset
            && self.terms == other.terms
    }
}

impl EquivariantLift {
    /// Validated affine lift `x ↦ L x + v`.
    pub fn affine(hom: InducedHom, linear: QMat, offset: QVec) -> Result<Self> {
        Self::new(hom, linear, offset, Vec::new())
    }

    pub fn new(hom: InducedHom, linear: QMat, offset: QVec, terms: Vec<TrigTerm>) -> Result<Self> {
        let (n, m) = (hom.source().dim(), hom.target().dim());
        if linear.nrows() != m || linear.ncols() != n || offset.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "L must be {m}x{n} and v of length {m}"
            )));
        }
        for t in &terms {
            if t.amplitude.len() != m || t.frequency.len() != n {
                return Err(Error::DimensionMismatch(
                    "perturbation amplitude/frequency length".into(),
                ));
            }
        }
        let lift = Self::build(hom, linear, offset, terms);
        lift.check_equivariance()?;
        Ok(lift)
    }

    fn build(hom: InducedHom, linear: QMat, offset: QVec, terms: Vec<TrigTerm>) -> Self {
        let terms: Vec<TrigTerm> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let terms_f = terms
            .iter()
            .map(|t| FloatTerm {
                amplitude: vec_to_f64(&t.amplitude),
                frequency: t.frequency.iter().map(|&x| x as f64).collect(),
                phase: to_f64(&t.phase),
            })
            .collect();
        EquivariantLift {
            linear_f: linear.to_f64_rows(),
            offset_f: vec_to_f64(&offset),
            hom,
            linear,
            offset,
            terms,
            terms_f,
        }
    }

    fn check_equivariance(&self) -> Result<()> {
        let src = self.hom.source();
        let tgt = self.hom.target();
        for (g, img) in src.generators().iter().zip(self.hom.images()) {
            let a = src.linear_diag(g.eps);
            let c = src.translation_part(g);
            let a2 = tgt.linear_diag(img.eps);
            let c2 = tgt.translation_part(img);
            for i in 0..self.linear.nrows() {
                for j in 0..self.linear.ncols() {
                    let l = self.linear[(i, j)];
                    if l * q(a[j] as i128) != q(a2[i] as i128) * l {
                        return Err(Error::NotEquivariant(format!(
                            "L·A_γ ≠ A_φ(γ)·L at entry ({i},{j}) for generator {g}"
                        )));
                    }
                }
            }
            let lc = self.linear.mul_vec(&c);
            for i in 0..lc.len() {
                let lhs = lc[i] + self.offset[i];
                let rhs = q(a2[i] as i128) * self.offset[i] + c2[i];
                if lhs != rhs {
                    return Err(Error::NotEquivariant(format!(
                        "L·c_γ + v ≠ A_φ(γ)·v + c_φ(γ) in coordinate {i} for generator {g}"
                    )));
                }
            }
            for (ti, t) in self.terms.iter().enumerate() {
                let lam = term_multiplier(t, &a, &c).ok_or_else(|| {
                    Error::NotEquivariant(format!(
                        "perturbation term {ti} has frequency/phase incompatible with generator {g}"
                    ))
                })?;
                for (i, amp) in t.amplitude.iter().enumerate() {
                    if !amp.is_zero() && a2[i] != lam {
                        return Err(Error::NotEquivariant(format!(
                            "perturbation term {ti}, coordinate {i}: generator {g} needs sign {lam}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn with_terms(&self, terms: Vec<TrigTerm>) -> Result<Self> {
        Self::new(self.hom.clone(), self.linear.clone(), self.offset.clone(), terms)
    }

    pub fn with_offset(&self, offset: QVec) -> Result<Self> {
        Self::new(self.hom.clone(), self.linear.clone(), offset, self.terms.clone())
    }

    pub fn hom(&self) -> &InducedHom {
        &self.hom
    }

    pub fn source(&self) -> &FlatManifold {
        self.hom.source()
    }

    pub fn target(&self) -> &FlatManifold {
        self.hom.target()
    }

    pub fn linear(&self) -> &QMat {
        &self.linear
    }

    pub fn offset(&self) -> &QVec {
        &self.offset
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn is_affine(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn linear_f64(&self) -> &[Vec<f64>] {
        &self.linear_f
    }

    pub fn offset_f64(&self) -> &[f64] {
        &self.offset_f
    }

    /// `L x + v` in exact arithmetic.
    pub fn evaluate_affine(&self, x: &[Q]) -> QVec {
        let mut y = self.linear.mul_vec(x);
        for (yi, vi) in y.iter_mut().zip(&self.offset) {
            *yi += vi;
        }
        y
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self
            .linear_f
            .iter()
            .zip(&self.offset_f)
            .map(|(row, v)| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + v)
            .collect();
        for t in &self.terms_f {
            let s = (TAU * (dot(&t.frequency, x) + t.phase)).sin();
            for (yi, a) in y.iter_mut().zip(&t.amplitude) {
                *yi += a * s;
            }
        }
        y
    }

    /// Closed-form derivative `L + Σ 2π a cos(2π(⟨m,x⟩+p)) mᵀ`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut j = self.linear_f.clone();
        for t in &self.terms_f {
            let c = TAU * (TAU * (dot(&t.frequency, x) + t.phase)).cos();
            for (row, a) in j.iter_mut().zip(&t.amplitude) {
                for (e, m) in row.iter_mut().zip(&t.frequency) {
                    *e += a * c * m;
                }
            }
        }
        j
    }

    /// Per-coordinate bound on `|δ(x)|`.
    pub fn perturbation_bound(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.offset_f.len()];
        for t in &self.terms_f {
            for (bi, a) in b.iter_mut().zip(&t.amplitude) {
                *bi += a.abs();
            }
        }
        b
    }

    /// Per-coordinate bound on `|Dδ(x) h|` for `|h|_∞ ≤ 1`.
    pub fn perturbation_lipschitz(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.offset_f.len()];
        for t in &self.terms_f {
            let m1: f64 = t.frequency.iter().map(|m| m.abs()).sum();
            for (bi, a) in b.iter_mut().zip(&t.amplitude) {
                *bi += a.abs() * TAU * m1;
            }
        }
        b
    }

    /// Per-coordinate bound on the second derivative `|D²δ(x)(h,h)|` for `|h|_∞ ≤ 1`.
    pub fn perturbation_curvature(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.offset_f.len()];
        for t in &self.terms_f {
            let m1: f64 = t.frequency.iter().map(|m| m.abs()).sum();
            for (bi, a) in b.iter_mut().zip(&t.amplitude) {
                *bi += a.abs() * (TAU * m1).powi(2);
            }
        }
        b
    }

    /// Pointwise combination `(1-s)·self + s·other` of two lifts with the same hom.
    pub fn interpolate(&self, other: &EquivariantLift, s: Q) -> EquivariantLift {
        debug_assert_eq!(self.hom, other.hom);
        let r = Q::one() - s;
        let linear = self.linear.scale(r).add(&other.linear.scale(s));
        let offset = self
            .offset
            .iter()
            .zip(&other.offset)
            .map(|(a, b)| a * r + b * s)
            .collect();
        let mut terms: Vec<TrigTerm> = self.terms.iter().map(|t| t.scaled(r)).collect();
        terms.extend(other.terms.iter().map(|t| t.scaled(s)));
        // equivariance conditions are linear in (L, v, amplitudes)
        Self::build(self.hom.clone(), linear, offset, terms)
    }

    /// Offset directions `w` for which `v + w` stays equivariant.
    pub fn free_offset_axes(&self) -> Vec<usize> {
        let tgt = self.hom.target();
        (0..tgt.dim())
            .filter(|&i| {
                self.hom
                    .images()
                    .iter()
                    .all(|img| tgt.linear_diag(img.eps)[i] == 1)
            })
            .collect()
    }
}

impl fmt::Display for EquivariantLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .linear
            .to_rows()
            .iter()
            .map(|r| r.iter().map(format_q).collect::<Vec<_>>().join(" "))
            .collect();
        write!(
            f,
            "L=[{}] v=[{}] terms={}",
            rows.join("; "),
            self.offset.iter().map(format_q).collect::<Vec<_>>().join(", "),
            self.terms.len()
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear part and offset of an affine lift.
pub type AffinePart = (QMat, QVec);

/// All affine lifts of a hom: a particular `(L, v)` plus a basis of homogeneous solutions.
pub fn affine_family(hom: &InducedHom) -> Result<(AffinePart, Vec<AffinePart>)> {
    let src = hom.source();
    let tgt = hom.target();
    let (n, m) = (src.dim(), tgt.dim());
    let unknowns = m * n + m;
    let lidx = |i: usize, j: usize| i * n + j;
    let vidx = |i: usize| m * n + i;
    let mut rows: Vec<QVec> = Vec::new();
    let mut rhs: QVec = Vec::new();
    for (g, img) in src.generators().iter().zip(hom.images()) {
        let a = src.linear_diag(g.eps);
        let c = src.translation_part(g);
        let a2 = tgt.linear_diag(img.eps);
        let c2 = tgt.translation_part(img);
        for i in 0..m {
            for j in 0..n {
                if a[j] != a2[i] {
                    let mut r = vec![Q::zero(); unknowns];
                    r[lidx(i, j)] = Q::one();
                    rows.push(r);
                    rhs.push(Q::zero());
                }
            }
            // Σ_j L_ij c_j + v_i - a2_i v_i = c2_i
            let mut r = vec![Q::zero(); unknowns];
            for j in 0..n {
                r[lidx(i, j)] = c[j];
            }
            r[vidx(i)] = Q::one() - q(a2[i] as i128);
            rows.push(r);
            rhs.push(c2[i]);
        }
    }
    let sys = QMat::from_rows(&rows);
    let split = |x: &[Q]| {
        let l = QMat::from_rows(&(0..m).map(|i| x[i * n..(i + 1) * n].to_vec()).collect::<Vec<_>>());
        (l, x[m * n..].to_vec())
    };
    let part = sys
        .solve_particular(&rhs)
        .ok_or_else(|| Error::NotEquivariant(format!("no affine lift realizes {hom}")))?;
    let homog = sys.null_space().iter().map(|x| split(x)).collect();
    Ok((split(&part), homog))
}

/// A random perturbation term compatible with `hom`, amplitudes bounded by `scale`.
pub fn random_equivariant_term<R: Rng>(hom: &InducedHom, rng: &mut R, scale: f64) -> Option<TrigTerm> {
    let src = hom.source();
    let tgt = hom.target();
    let (n, m) = (src.dim(), tgt.dim());
    for _ in 0..64 {
        let freq: IntVec = (0..n).map(|_| rng.random_range(-2..=2)).collect();
        if freq.iter().all(|&x| x == 0) {
            continue;
        }
        let phase = Q::new(rng.random_range(0..8), 8);
        let probe = TrigTerm::new(vec![Q::one(); m], freq.clone(), phase);
        let mut allowed = vec![true; m];
        let mut ok = true;
        for (g, img) in src.generators().iter().zip(hom.images()) {
            let Some(lam) = term_multiplier(&probe, &src.linear_diag(g.eps), &src.translation_part(g))
            else {
                ok = false;
                break;
            };
            let a2 = tgt.linear_diag(img.eps);
            for i in 0..m {
                allowed[i] &= a2[i] == lam;
            }
        }
        if !ok || !allowed.iter().any(|&x| x) {
            continue;
        }
        let amplitude: QVec = allowed
            .iter()
            .map(|&on| {
                if on {
                    dyadic(rng.random_range(-scale..scale), 20)
                } else {
                    Q::zero()
                }
            })
            .collect();
        let term = TrigTerm::new(amplitude, freq, phase);
        if !term.is_zero() {
            return Some(term);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus_hom(b: &[IntVec]) -> InducedHom {
        let n = b.len();
        InducedHom::from_matrix(FlatManifold::torus(n), FlatManifold::torus(n), b).unwrap()
    }

    fn klein_kill_a(s: i64) -> InducedHom {
        let k = FlatManifold::klein_bottle();
        InducedHom::new(
            k.clone(),
            k,
            vec![
                DeckElement::translation(vec![2 * s, 0]),
                DeckElement::translation(vec![0, 0]),
                DeckElement::translation(vec![s, 0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn linear_torus_maps() {
        let b = vec![vec![2, 1], vec![0, 3]];
        let hom = torus_hom(&b);
        let l = QMat::from_int_rows(&b);
        assert!(EquivariantLift::affine(hom.clone(), l, vec![q(0), q(0)]).is_ok());
        let wrong = QMat::from_int_rows(&[vec![2, 0], vec![0, 3]]);
        assert!(matches!(
            EquivariantLift::affine(hom, wrong, vec![q(0), q(0)]),
            Err(Error::NotEquivariant(_))
        ));
    }

    #[test]
    fn klein_family_kills_the_fibre() {
        for s in [-2, 1, 3] {
            let hom = klein_kill_a(s);
            let ((l, v), homog) = affine_family(&hom).unwrap();
            assert_eq!(l, QMat::from_int_rows(&[vec![2 * s, 0], vec![0, 0]]));
            let lift = EquivariantLift::affine(hom.clone(), l.clone(), v).unwrap();
            assert!(lift.linear().column(1).iter().all(Zero::is_zero));
            // every image is a translation, so the offset is unconstrained
            assert_eq!(homog.len(), 2);
            assert_eq!(lift.free_offset_axes(), vec![0, 1]);
            assert!(!hom.is_orientation_true());
        }
    }

    #[test]
    fn relation_failures_are_reported() {
        let k = FlatManifold::klein_bottle();
        // glide ↦ identity forces e1 = g² ↦ identity
        let bad = InducedHom::new(
            k.clone(),
            k.clone(),
            vec![
                DeckElement::translation(vec![1, 0]),
                DeckElement::translation(vec![0, 0]),
                DeckElement::translation(vec![0, 0]),
            ],
        );
        assert!(matches!(bad, Err(Error::InvalidHom(_))));
        let id = InducedHom::new(k.clone(), k.clone(), k.generators()).unwrap();
        assert!(id.is_orientation_true());
        let g = DeckElement::new(1, vec![3, -2]);
        assert_eq!(id.apply(&g), g);
    }

    #[test]
    fn perturbation_rules() {
        let k = FlatManifold::klein_bottle();
        let id = InducedHom::new(k.clone(), k.clone(), k.generators()).unwrap();
        let l = QMat::identity(2);
        let base = EquivariantLift::affine(id, l, vec![q(0), q(0)]).unwrap();
        // sin(2π x2) flips under y ↦ -y, sign -1 on the second axis
        let ok = TrigTerm::new(vec![q(0), qr(1, 100)], vec![0, 1], q(0));
        assert!(base.with_terms(vec![ok]).is_ok());
        let bad = TrigTerm::new(vec![qr(1, 100), q(0)], vec![0, 1], q(0));
        assert!(base.with_terms(vec![bad]).is_err());
        // sin(2π·2x1) is invariant under x1 ↦ x1 + 1/2
        let ok2 = TrigTerm::new(vec![qr(1, 100), q(0)], vec![2, 0], qr(1, 8));
        assert!(base.with_terms(vec![ok2]).is_ok());
        let bad2 = TrigTerm::new(vec![qr(1, 100), q(0)], vec![1, 0], q(0));
        assert!(base.with_terms(vec![bad2]).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = FlatManifold::klein_bottle();
        let id = InducedHom::new(k.clone(), k.clone(), k.generators()).unwrap();
        let base = EquivariantLift::affine(id.clone(), QMat::identity(2), vec![q(0), q(0)]).unwrap();
        for _ in 0..20 {
            let terms: Vec<_> = (0..3)
                .filter_map(|_| random_equivariant_term(&id, &mut rng, 0.05))
                .collect();
            let lift = base.with_terms(terms).unwrap();
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let j = lift.jacobian(&x);
            let h = 1e-6;
            for c in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[c] += h;
                xm[c] -= h;
                let (fp, fm) = (lift.evaluate(&xp), lift.evaluate(&xm));
                for r in 0..2 {
                    assert!(((fp[r] - fm[r]) / (2.0 * h) - j[r][c]).abs() < 1e-6);
                }
            }
            // equivariance on a sample
            for g in k.generators() {
                let lhs = lift.evaluate(&k.apply_f64(&g, &x));
                let rhs = k.apply_f64(&id.apply(&g), &lift.evaluate(&x));
                for (a, b) in lhs.iter().zip(&rhs) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
