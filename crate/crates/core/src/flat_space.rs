//! Flat model manifolds `R^n / Γ`: tori and single-glide quotients.
//!
//! A deck element is stored in the normal form `(eps, k)` and acts by
//! `x ↦ D^eps x + k + eps t`. On a torus `eps` is always 0.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{vec_key_cmp, IntVec};
use crate::rational::{format_q, frac, is_integer_vec, q, to_f64, Q, QVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Torus,
    Glide,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlideData {
    /// Diagonal of the linear part, entries ±1.
    pub linear: Vec<i8>,
    pub translation: QVec,
    /// `D t + t`, the lattice element equal to the square of the glide.
    square: IntVec,
    /// First axis fixed by `D` along which the glide moves by a half period.
    half_axis: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlatManifold {
    dim: usize,
    glide: Option<GlideData>,
    label: String,
}

impl FlatManifold {
    /// Validating constructor. `linear` holds the diagonal of `D`.
    pub fn new(
        dim: usize,
        kind: ManifoldKind,
        linear: Option<Vec<i8>>,
        translation: Option<QVec>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("dimension must be positive".into()));
        }
        let label = label.into();
        match kind {
            ManifoldKind::Torus => {
                if linear.is_some() || translation.is_some() {
                    return Err(Error::InvalidGlide(
                        "a torus carries no glide linear part or translation".into(),
                    ));
                }
                Ok(FlatManifold { dim, glide: None, label })
            }
            ManifoldKind::Glide => {
                let d = linear.ok_or_else(|| Error::InvalidGlide("missing D".into()))?;
                let t = translation.ok_or_else(|| Error::InvalidGlide("missing t".into()))?;
                if d.len() != dim || t.len() != dim {
                    return Err(Error::InvalidGlide(format!(
                        "D and t must have length {dim} (got {} and {})",
                        d.len(),
                        t.len()
                    )));
                }
                if let Some(bad) = d.iter().find(|&&x| x != 1 && x != -1) {
                    return Err(Error::InvalidGlide(format!(
                        "D must be diagonal with entries ±1 so that D² = I (found {bad})"
                    )));
                }
                let square: QVec = d
                    .iter()
                    .zip(&t)
                    .map(|(&di, ti)| q(di as i128) * ti + ti)
                    .collect();
                if !is_integer_vec(&square) {
                    return Err(Error::InvalidGlide("D·t + t is not an integer vector".into()));
                }
                if is_integer_vec(&t) {
                    return Err(Error::InvalidGlide(
                        "t is an integer vector, so the glide is a lattice translation".into(),
                    ));
                }
                // free action: some D-fixed axis must carry a non-integral shift
                let half_axis = (0..dim)
                    .find(|&i| d[i] == 1 && !t[i].is_integer())
                    .ok_or_else(|| {
                        Error::InvalidGlide(
                            "glide has fixed points (no D-fixed axis with fractional shift)".into(),
                        )
                    })?;
                let square = square.iter().map(|x| x.to_integer() as i64).collect();
                Ok(FlatManifold {
                    dim,
                    glide: Some(GlideData {
                        linear: d,
                        translation: t,
                        square,
                        half_axis,
                    }),
                    label,
                })
            }
        }
    }

    pub fn torus(dim: usize) -> Self {
        FlatManifold {
            dim,
            glide: None,
            label: format!("T{dim}"),
        }
    }

    /// `R^2` modulo `Z^2` and the glide `(x, y) ↦ (x + 1/2, -y)`.
    pub fn klein_bottle() -> Self {
        Self::new(
            2,
            ManifoldKind::Glide,
            Some(vec![1, -1]),
            Some(vec![Q::new(1, 2), Q::zero()]),
            "K",
        )
        .expect("Klein bottle data is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ManifoldKind {
        if self.glide.is_some() {
            ManifoldKind::Glide
        } else {
            ManifoldKind::Torus
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn glide(&self) -> Option<&GlideData> {
        self.glide.as_ref()
    }

    /// Axis along which the fundamental domain is halved: fixed by `D` with shift `1/2`.
    pub fn half_axis(&self) -> Option<usize> {
        self.glide.as_ref().map(|g| g.half_axis)
    }

    pub fn is_glide(&self) -> bool {
        self.glide.is_some()
    }

    /// Diagonal of `D^eps`.
    pub fn linear_diag(&self, eps: u8) -> Vec<i8> {
        match (&self.glide, eps) {
            (Some(g), 1) => g.linear.clone(),
            _ => vec![1; self.dim],
        }
    }

    pub fn glide_det(&self) -> i8 {
        self.glide
            .as_ref()
            .map_or(1, |g| g.linear.iter().product())
    }

    pub fn is_orientable(&self) -> bool {
        self.glide_det() == 1
    }

    pub fn identity(&self) -> DeckElement {
        DeckElement::translation(vec![0; self.dim])
    }

    /// `e_i` as a deck translation.
    pub fn lattice_generator(&self, i: usize) -> DeckElement {
        let mut k = vec![0; self.dim];
        k[i] = 1;
        DeckElement::translation(k)
    }

    pub fn glide_generator(&self) -> Option<DeckElement> {
        self.glide.as_ref().map(|_| DeckElement::new(1, vec![0; self.dim]))
    }

    /// The `n` lattice generators followed by the glide, if any.
    pub fn generators(&self) -> Vec<DeckElement> {
        let mut gens: Vec<_> = (0..self.dim).map(|i| self.lattice_generator(i)).collect();
        gens.extend(self.glide_generator());
        gens
    }

    pub fn contains(&self, g: &DeckElement) -> bool {
        g.k.len() == self.dim && (g.eps == 0 || (g.eps == 1 && self.is_glide()))
    }

    pub fn compose(&self, a: &DeckElement, b: &DeckElement) -> DeckElement {
        debug_assert!(self.contains(a) && self.contains(b));
        match (a.eps, b.eps) {
            (0, e) => DeckElement::new(e, add(&a.k, &b.k)),
            (1, e) => {
                let g = self.glide.as_ref().expect("glide element on a torus");
                let dk: IntVec = b.k.iter().zip(&g.linear).map(|(x, &d)| x * d as i64).collect();
                let mut k = add(&dk, &a.k);
                if e == 1 {
                    k = add(&k, &g.square);
                    DeckElement::new(0, k)
                } else {
                    DeckElement::new(1, k)
                }
            }
            _ => unreachable!("eps is 0 or 1"),
        }
    }

    pub fn inverse(&self, a: &DeckElement) -> DeckElement {
        if a.eps == 0 {
            return DeckElement::translation(a.k.iter().map(|x| -x).collect());
        }
        let g = self.glide.as_ref().expect("glide element on a torus");
        let k = a
            .k
            .iter()
            .zip(&g.linear)
            .zip(&g.square)
            .map(|((x, &d), s)| -(x * d as i64) - s)
            .collect();
        DeckElement::new(1, k)
    }

    pub fn pow(&self, a: &DeckElement, exp: i64) -> DeckElement {
        let mut base = if exp < 0 { self.inverse(a) } else { a.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.compose(&acc, &base);
            }
            base = self.compose(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn conjugate(&self, by: &DeckElement, a: &DeckElement) -> DeckElement {
        self.compose(&self.compose(by, a), &self.inverse(by))
    }

    /// Orientation character `det(D)^eps`.
    pub fn character(&self, a: &DeckElement) -> i8 {
        if a.eps == 1 {
            self.glide_det()
        } else {
            1
        }
    }

    /// Translation part `k + eps t`.
    pub fn translation_part(&self, a: &DeckElement) -> QVec {
        let mut c: QVec = a.k.iter().map(|&x| q(x as i128)).collect();
        if a.eps == 1 {
            let g = self.glide.as_ref().expect("glide element on a torus");
            for (ci, ti) in c.iter_mut().zip(&g.translation) {
                *ci += ti;
            }
        }
        c
    }

    pub fn apply(&self, a: &DeckElement, x: &[Q]) -> QVec {
        let d = self.linear_diag(a.eps);
        let c = self.translation_part(a);
        x.iter()
            .zip(&d)
            .zip(&c)
            .map(|((xi, &di), ci)| q(di as i128) * xi + ci)
            .collect()
    }

    pub fn apply_f64(&self, a: &DeckElement, x: &[f64]) -> Vec<f64> {
        let d = self.linear_diag(a.eps);
        let c = self.translation_part(a);
        x.iter()
            .zip(&d)
            .zip(&c)
            .map(|((xi, &di), ci)| di as f64 * xi + to_f64(ci))
            .collect()
    }

    /// Canonical fundamental-domain point `x0` and deck element `γ` with `γ·x0 = x`.
    ///
    /// On a torus `x0 = x - floor(x) ∈ [0,1)^n`. On a glide manifold the domain is
    /// `[0,1)^n` with the half axis restricted to `[0, 1/2)`: when the fractional part
    /// of `x` along the half axis is at least 1/2 the glide is applied once, then the
    /// result is translated into the unit cube.
    pub fn reduce_to_fundamental_domain(&self, x: &[Q]) -> (QVec, DeckElement) {
        match &self.glide {
            Some(g) if frac(&x[g.half_axis]) >= Q::new(1, 2) => {
                // x0 = D (x - t) - D k with D k = floor(D (x - t))
                let w: QVec = x
                    .iter()
                    .zip(&g.translation)
                    .zip(&g.linear)
                    .map(|((xi, ti), &d)| q(d as i128) * (xi - ti))
                    .collect();
                let fl: IntVec = w.iter().map(|wi| wi.floor().to_integer() as i64).collect();
                let x0 = w.iter().map(frac).collect();
                let k = fl.iter().zip(&g.linear).map(|(f, &d)| f * d as i64).collect();
                (x0, DeckElement::new(1, k))
            }
            _ => {
                let fl: IntVec = x.iter().map(|xi| xi.floor().to_integer() as i64).collect();
                (x.iter().map(frac).collect(), DeckElement::translation(fl))
            }
        }
    }

    /// Float counterpart of [`Self::reduce_to_fundamental_domain`]; coordinates within
    /// `1e-12` of the upper face snap to 0 so boundary roots reduce consistently.
    pub fn reduce_f64(&self, x: &[f64]) -> (Vec<f64>, DeckElement) {
        fn split(v: f64) -> (f64, i64) {
            let mut f = v.floor();
            let mut r = v - f;
            if r > 1.0 - 1e-12 {
                r = 0.0;
                f += 1.0;
            }
            (r, f as i64)
        }
        match &self.glide {
            Some(g) if split(x[g.half_axis]).0 >= 0.5 => {
                let t: Vec<f64> = g.translation.iter().map(to_f64).collect();
                let w: Vec<f64> = (0..self.dim)
                    .map(|i| g.linear[i] as f64 * (x[i] - t[i]))
                    .collect();
                let parts: Vec<(f64, i64)> = w.iter().map(|&v| split(v)).collect();
                let x0 = parts.iter().map(|p| p.0).collect();
                let k = parts
                    .iter()
                    .zip(&g.linear)
                    .map(|(p, &d)| p.1 * d as i64)
                    .collect();
                (x0, DeckElement::new(1, k))
            }
            _ => {
                let parts: Vec<(f64, i64)> = x.iter().map(|&v| split(v)).collect();
                (
                    parts.iter().map(|p| p.0).collect(),
                    DeckElement::translation(parts.iter().map(|p| p.1).collect()),
                )
            }
        }
    }

    /// Distance in the quotient between two points, measured with the sup norm on
    /// lifts; exact for separations below 1/4.
    pub fn quotient_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        let eps_range = if self.is_glide() { 0..2 } else { 0..1 };
        for e in eps_range {
            let yy = if e == 1 {
                self.apply_f64(&DeckElement::new(1, vec![0; self.dim]), y)
            } else {
                y.to_vec()
            };
            let d = yy
                .iter()
                .zip(x)
                .map(|(a, b)| {
                    let diff = a - b;
                    (diff - diff.round()).abs()
                })
                .fold(0.0, f64::max);
            best = best.min(d);
        }
        best
    }
}

impl fmt::Display for FlatManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.glide {
            None => write!(f, "{} (torus, n={})", self.label, self.dim),
            Some(g) => write!(
                f,
                "{} (glide, n={}, D={:?}, t=[{}])",
                self.label,
                self.dim,
                g.linear,
                g.translation.iter().map(format_q).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

fn add(a: &[i64], b: &[i64]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// A deck transformation in normal form `(eps, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeckElement {
    pub eps: u8,
    pub k: IntVec,
}

impl DeckElement {
    pub fn new(eps: u8, k: IntVec) -> Self {
        debug_assert!(eps <= 1);
        DeckElement { eps, k }
    }

    pub fn translation(k: IntVec) -> Self {
        DeckElement { eps: 0, k }
    }

    pub fn is_identity(&self) -> bool {
        self.eps == 0 && self.k.iter().all(|&x| x == 0)
    }
}

/// Canonical order: `eps` first, then `k` lexicographically with 0 < 1 < -1 < 2 < -2 < ...
impl Ord for DeckElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.eps
            .cmp(&other.eps)
            .then_with(|| vec_key_cmp(&self.k, &other.k))
    }
}

impl PartialOrd for DeckElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DeckElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k: Vec<String> = self.k.iter().map(|x| x.to_string()).collect();
        write!(f, "({}, ({}))", self.eps, k.join(","))
    }
}

/// Open axis-aligned box with rational corners, taken in universal-cover coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpenBox {
    pub lo: QVec,
    pub hi: QVec,
}

impl OpenBox {
    pub fn new(lo: QVec, hi: QVec) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::InvalidRegion("corner lengths differ".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(Error::InvalidRegion("box has an empty side (lo >= hi)".into()));
        }
        Ok(OpenBox { lo, hi })
    }

    /// Cube of half-width `r` around `center`.
    pub fn cube(center: &[Q], r: Q) -> Self {
        OpenBox {
            lo: center.iter().map(|c| c - r).collect(),
            hi: center.iter().map(|c| c + r).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains_upstairs(&self, y: &[Q]) -> bool {
        y.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| a < v && v < b)
    }

    pub fn contains_upstairs_f64(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| to_f64(a) < *v && *v < to_f64(b))
    }

    /// Image of the box under a deck element.
    pub fn transformed(&self, m: &FlatManifold, g: &DeckElement) -> OpenBox {
        let a = m.apply(g, &self.lo);
        let b = m.apply(g, &self.hi);
        OpenBox {
            lo: a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect(),
            hi: a.iter().zip(&b).map(|(x, y)| *x.max(y)).collect(),
        }
    }

    /// Whether some translate of `self` by an element with the given `eps` meets `other`.
    fn meets_translate(&self, m: &FlatManifold, eps: u8, other: &OpenBox) -> bool {
        let moved = self.transformed(m, &DeckElement::new(eps, vec![0; m.dim()]));
        // need integer k_i with other.lo_i - moved.hi_i < k_i < other.hi_i - moved.lo_i
        moved
            .lo
            .iter()
            .zip(&moved.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((a, b), (c, d))| {
                let lower = c - b;
                let upper = d - a;
                let k = lower.floor() + Q::one();
                k < upper
            })
    }

    /// Whether the projection of this box to the manifold is disjoint from that of `other`.
    pub fn projection_disjoint(&self, m: &FlatManifold, other: &OpenBox) -> bool {
        let eps_range = if m.is_glide() { 0..2u8 } else { 0..1 };
        !eps_range.into_iter().any(|e| self.meets_translate(m, e, other))
    }

    /// The box embeds in the manifold: no nontrivial deck element maps it onto itself partially.
    pub fn embeds(&self, m: &FlatManifold) -> bool {
        let widths_ok = self.lo.iter().zip(&self.hi).all(|(a, b)| b - a <= Q::one());
        widths_ok && (!m.is_glide() || !self.meets_translate(m, 1, self))
    }

    /// A lift of the fundamental-domain point `x0` inside the box, with the deck element
    /// carrying `x0` there.
    pub fn lift_into(&self, m: &FlatManifold, x0: &[Q]) -> Option<(QVec, DeckElement)> {
        let eps_range = if m.is_glide() { 0..2u8 } else { 0..1 };
        for e in eps_range {
            let base = DeckElement::new(e, vec![0; m.dim()]);
            let y = m.apply(&base, x0);
            let shift: IntVec = y
                .iter()
                .zip(&self.lo)
                .map(|(yi, lo)| ((lo - yi).floor() + Q::one()).to_integer() as i64)
                .collect();
            let g = m.compose(&DeckElement::translation(shift), &base);
            let lifted = m.apply(&g, x0);
            if self.contains_upstairs(&lifted) {
                return Some((lifted, g));
            }
        }
        None
    }

    /// Float lift nearest the box center and its sup-norm distance to the box boundary
    /// (negative when outside).
    pub fn lift_into_f64(&self, m: &FlatManifold, x0: &[f64]) -> (Vec<f64>, DeckElement, f64) {
        let center: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (to_f64(a) + to_f64(b)) / 2.0)
            .collect();
        let eps_range = if m.is_glide() { 0..2u8 } else { 0..1 };
        let mut best: Option<(Vec<f64>, DeckElement, f64)> = None;
        for e in eps_range {
            let base = DeckElement::new(e, vec![0; m.dim()]);
            let y = m.apply_f64(&base, x0);
            let shift: IntVec = y
                .iter()
                .zip(&center)
                .map(|(yi, c)| (c - yi).round() as i64)
                .collect();
            let g = m.compose(&DeckElement::translation(shift), &base);
            let lifted = m.apply_f64(&g, x0);
            let inner = lifted
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .map(|(v, (a, b))| (v - to_f64(a)).min(to_f64(b) - v))
                .fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|b| inner > b.2) {
                best = Some((lifted, g, inner));
            }
        }
        best.expect("at least one eps value")
    }
}

/// An open subset of the manifold: the whole manifold or the projection of finitely many boxes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OpenRegion {
    Full,
    Boxes(Vec<OpenBox>),
}

impl OpenRegion {
    pub fn empty() -> Self {
        OpenRegion::Boxes(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, OpenRegion::Boxes(b) if b.is_empty())
    }

    pub fn boxes(&self) -> &[OpenBox] {
        match self {
            OpenRegion::Full => &[],
            OpenRegion::Boxes(b) => b,
        }
    }

    pub fn validate(&self, m: &FlatManifold) -> Result<()> {
        for b in self.boxes() {
            if b.dim() != m.dim() {
                return Err(Error::InvalidRegion(format!(
                    "box of dimension {} in a {}-manifold",
                    b.dim(),
                    m.dim()
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, m: &FlatManifold, x0: &[Q]) -> bool {
        match self {
            OpenRegion::Full => true,
            OpenRegion::Boxes(bs) => bs.iter().any(|b| b.lift_into(m, x0).is_some()),
        }
    }

    /// Sup-norm distance from the point to the complement of the region, as seen from the
    /// best lift (positive inside, non-positive outside).
    pub fn inner_margin_f64(&self, m: &FlatManifold, x0: &[f64]) -> f64 {
        match self {
            OpenRegion::Full => f64::INFINITY,
            OpenRegion::Boxes(bs) => bs
                .iter()
                .map(|b| b.lift_into_f64(m, x0).2)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains_f64(&self, m: &FlatManifold, x0: &[f64]) -> bool {
        self.inner_margin_f64(m, x0) > 0.0
    }

    /// Projections are disjoint.
    pub fn is_disjoint_from(&self, m: &FlatManifold, other: &OpenRegion) -> bool {
        match (self, other) {
            (OpenRegion::Full, o) | (o, OpenRegion::Full) => o.is_empty(),
            (OpenRegion::Boxes(a), OpenRegion::Boxes(b)) => a
                .iter()
                .all(|x| b.iter().all(|y| x.projection_disjoint(m, y))),
        }
    }

    pub fn union(&self, other: &OpenRegion) -> OpenRegion {
        match (self, other) {
            (OpenRegion::Full, _) | (_, OpenRegion::Full) => OpenRegion::Full,
            (OpenRegion::Boxes(a), OpenRegion::Boxes(b)) => {
                OpenRegion::Boxes(a.iter().chain(b).cloned().collect())
            }
        }
    }
}

/// The ambient domain `V` whose fundamental group decides degeneracy and classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum DomainMarker {
    #[default]
    Full,
    /// A single embedded box: simply connected, trivial deck group.
    Chart(OpenBox),
}

impl DomainMarker {
    pub fn chart(m: &FlatManifold, b: OpenBox) -> Result<Self> {
        if b.dim() != m.dim() {
            return Err(Error::InvalidRegion("chart dimension mismatch".into()));
        }
        if !b.embeds(m) {
            return Err(Error::InvalidRegion(
                "chart box overlaps one of its deck translates".into(),
            ));
        }
        Ok(DomainMarker::Chart(b))
    }

    pub fn is_full(&self) -> bool {
        matches!(self, DomainMarker::Full)
    }
}

pub fn sign_q(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}
