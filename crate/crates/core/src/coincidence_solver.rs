//! Locating `Coin(f, g, U)` in fundamental-domain coordinates.
//!
//! For every candidate deck element `α = (e, k)` of the target the equation
//! `g̃(x) = α f̃(x)` is solved upstairs: exactly for affine lifts, by bounded subdivision and
//! Newton iteration otherwise. Solutions are reduced to the fundamental domain, where each
//! coincidence point has exactly one lift and one `α`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};

use crate::equivariant_map::EquivariantLift;
use crate::error::{Error, Result};
use crate::flat_space::{sign_q, DeckElement, DomainMarker, FlatManifold, OpenBox, OpenRegion};
use crate::lattice::IntVec;
use crate::rational::{to_f64, vec_to_f64, QMat, QVec, Q};
use crate::twisted_conjugacy::TwistedPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMode {
    /// Exact for affine pairs with nonsingular difference matrices, numeric otherwise.
    #[default]
    Auto,
    Exact,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub mode: SolverMode,
    /// Residual accepted by Newton iteration.
    pub tol: f64,
    /// Subdivision stops at cells of width `1/grid`.
    pub grid: usize,
    /// Points closer than this in the quotient are the same point.
    pub dedup_radius: f64,
    /// `|det(jac_diff)|` above this counts as regular.
    pub regular_threshold: f64,
    pub max_newton: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            mode: SolverMode::Auto,
            tol: 1e-10,
            grid: 32,
            dedup_radius: 1e-6,
            regular_threshold: 1e-8,
            max_newton: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointCoords {
    Exact(QVec),
    Float(Vec<f64>),
}

impl PointCoords {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            PointCoords::Exact(x) => vec_to_f64(x),
            PointCoords::Float(x) => x.clone(),
        }
    }

    pub fn exact(&self) -> Option<&QVec> {
        match self {
            PointCoords::Exact(x) => Some(x),
            PointCoords::Float(_) => None,
        }
    }

    fn cmp_coords(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PointCoords::Exact(a), PointCoords::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            }
        }
    }
}

/// One coincidence point with its class data.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceRecord {
    /// Fundamental-domain coordinates.
    pub point: PointCoords,
    /// Deck element carrying `point` to the canonical lift (identity unless the domain is a chart).
    pub lift_element: DeckElement,
    /// `α` with `α f̃(x̃) = g̃(x̃)` at the canonical lift `x̃`.
    pub class_element: DeckElement,
    /// Canonical representative of the class of `α` over the domain.
    pub class_rep: DeckElement,
    /// `χ_M(γ) χ_N(g_#(γ))` for a `γ` carrying `α` to `class_rep`.
    pub alignment: i8,
    /// `Jg̃ − A_α Jf̃` at the canonical lift.
    pub jac_diff: Vec<Vec<f64>>,
    pub jac_diff_exact: Option<QMat>,
    pub regular: bool,
    /// Sign of `det(jac_diff)`; 0 when not regular.
    pub lift_sign: i8,
    pub degenerate: bool,
}

impl CoincidenceRecord {
    /// `α` and `lift_sign` seen from the lift `γ x̃` instead of `x̃`.
    pub fn relift(&self, pair: &TwistedPair, gamma: &DeckElement) -> (DeckElement, i8) {
        (
            pair.act(gamma, &self.class_element),
            self.lift_sign * pair.alignment(gamma),
        )
    }

    /// Canonical lift coordinates.
    pub fn lift_f64(&self, m: &FlatManifold) -> Vec<f64> {
        m.apply_f64(&self.lift_element, &self.point.to_f64())
    }
}

/// Canonical representative of the record's class under the full-domain twisted action.
pub fn class_of_point(record: &CoincidenceRecord, pair: &TwistedPair) -> DeckElement {
    pair.canonical(&record.class_element)
}

struct Sheet {
    eps: u8,
    /// `L_g − A_e L_f`
    diff: QMat,
    /// `v_g − A_e v_f − e t_N`
    shift: QVec,
    diff_f: Vec<Vec<f64>>,
    shift_f: Vec<f64>,
}

/// Solver for a fixed pair of lifts.
pub struct CoincidenceSolver {
    f: EquivariantLift,
    g: EquivariantLift,
    pair: TwistedPair,
    opts: SolverOptions,
    sheets: Vec<Sheet>,
}

impl CoincidenceSolver {
    pub fn new(f: &EquivariantLift, g: &EquivariantLift, opts: SolverOptions) -> Result<Self> {
        if f.source() != g.source() || f.target() != g.target() {
            return Err(Error::DimensionMismatch(
                "f and g must share source and target manifolds".into(),
            ));
        }
        let pair = TwistedPair::new(f.hom(), g.hom())?;
        let tgt = f.target();
        let eps_values: &[u8] = if tgt.is_glide() { &[0, 1] } else { &[0] };
        let sheets = eps_values
            .iter()
            .map(|&e| {
                let d: Vec<Q> = tgt.linear_diag(e).iter().map(|&x| Q::from(x as i128)).collect();
                let diff = g.linear().sub(&f.linear().scale_rows(&d));
                let tn = tgt.translation_part(&DeckElement::new(e, vec![0; tgt.dim()]));
                let shift: QVec = (0..tgt.dim())
                    .map(|i| g.offset()[i] - d[i] * f.offset()[i] - tn[i])
                    .collect();
                Sheet {
                    eps: e,
                    diff_f: diff.to_f64_rows(),
                    shift_f: vec_to_f64(&shift),
                    diff,
                    shift,
                }
            })
            .collect();
        Ok(CoincidenceSolver {
            f: f.clone(),
            g: g.clone(),
            pair,
            opts,
            sheets,
        })
    }

    pub fn pair(&self) -> &TwistedPair {
        &self.pair
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    fn source(&self) -> &FlatManifold {
        self.f.source()
    }

    fn is_affine(&self) -> bool {
        self.f.is_affine() && self.g.is_affine()
    }

    /// `det(L_g − L_f) ≠ 0` and likewise on the glide sheet.
    pub fn is_nonsingular_affine(&self) -> bool {
        self.is_affine() && self.sheets.iter().all(|s| !s.diff.det().is_zero())
    }

    /// Per sheet, the integer box of `k` for which `(e, k) f̃` and `g̃` can meet over
    /// `x ∈ [lo, hi]`.
    pub fn k_ranges_over(&self, lo: &[f64], hi: &[f64]) -> Vec<(u8, Vec<(i64, i64)>)> {
        let pf = self.f.perturbation_bound();
        let pg = self.g.perturbation_bound();
        self.sheets
            .iter()
            .map(|s| {
                let ranges = (0..s.shift_f.len())
                    .map(|i| {
                        let (mut a, mut b) = (s.shift_f[i], s.shift_f[i]);
                        for j in 0..lo.len() {
                            let m = s.diff_f[i][j];
                            a += (m * lo[j]).min(m * hi[j]);
                            b += (m * lo[j]).max(m * hi[j]);
                        }
                        let slack = pf[i] + pg[i] + 1e-9 * (1.0 + a.abs().max(b.abs()));
                        ((a - slack).ceil() as i64, (b + slack).floor() as i64)
                    })
                    .collect();
                (s.eps, ranges)
            })
            .collect()
    }

    /// Every `α` for which `α f̃` and `g̃` can meet over `x ∈ [lo, hi]`.
    pub fn candidates_over(&self, lo: &[f64], hi: &[f64]) -> Vec<DeckElement> {
        let mut out = Vec::new();
        for (eps, ranges) in self.k_ranges_over(lo, hi) {
            for k in integer_box(&ranges) {
                out.push(DeckElement::new(eps, k));
            }
        }
        out
    }

    /// `g̃(x) − α f̃(x)`.
    pub fn residual_for(&self, alpha: &DeckElement, x: &[f64]) -> Vec<f64> {
        let s = self.sheet(alpha.eps);
        self.residual(s, &alpha.k, x)
    }

    /// Per coordinate, a bound on `|h_i(x) − h_i(y)| / |x − y|_∞` for `h = g̃ − α f̃` with
    /// `α` on the given sheet.
    pub fn row_lipschitz(&self, eps: u8) -> Vec<f64> {
        let s = self.sheet(eps);
        let lf = self.f.perturbation_lipschitz();
        let lg = self.g.perturbation_lipschitz();
        (0..s.diff_f.len())
            .map(|i| s.diff_f[i].iter().map(|m| m.abs()).sum::<f64>() + lf[i] + lg[i])
            .collect()
    }

    fn sheet(&self, eps: u8) -> &Sheet {
        self.sheets.iter().find(|s| s.eps == eps).expect("eps within the target group")
    }

    /// Candidates over the unit cube, which contains the fundamental domain.
    pub fn candidates(&self, region: &OpenRegion) -> Vec<DeckElement> {
        if region.is_empty() {
            return Vec::new();
        }
        let n = self.source().dim();
        self.candidates_over(&vec![0.0; n], &vec![1.0; n])
    }

    pub fn find(&self, region: &OpenRegion, domain: &DomainMarker) -> Result<Vec<CoincidenceRecord>> {
        match self.opts.mode {
            SolverMode::Exact => self.find_affine(region, domain),
            SolverMode::Numeric => self.find_numeric(region, domain),
            SolverMode::Auto if self.is_nonsingular_affine() => self.find_affine(region, domain),
            SolverMode::Auto => self.find_numeric(region, domain),
        }
    }

    /// Exact solver for affine pairs.
    pub fn find_affine(&self, region: &OpenRegion, domain: &DomainMarker) -> Result<Vec<CoincidenceRecord>> {
        if !self.is_affine() {
            return Err(Error::config(
                "solver.mode",
                "the exact solver needs affine lifts (no perturbation terms)",
            ));
        }
        region.validate(self.source())?;
        let src = self.source().clone();
        let n = src.dim();
        let mut records = Vec::new();
        if region.is_empty() {
            return Ok(records);
        }
        let half_axis = src.half_axis();
        for s in &self.sheets {
            let det = s.diff.det();
            if det.is_zero() {
                return Err(Error::SingularPair(format!(
                    "det(L_g − A L_f) = 0 on the eps={} sheet",
                    s.eps
                )));
            }
            let inv = s.diff.inverse().expect("nonsingular");
            // x = N (wd k − wn) / (den wd), all integers
            let den = inv.common_denominator();
            let nmat: Vec<Vec<i128>> = (0..n)
                .map(|i| (0..n).map(|j| (inv[(i, j)] * Q::from(den)).to_integer()).collect())
                .collect();
            let wd = s.shift.iter().fold(1i128, |acc, x| num_integer::lcm(acc, *x.denom()));
            let wn: Vec<i128> = s.shift.iter().map(|x| (x * Q::from(wd)).to_integer()).collect();
            let total = den * wd;
            let ranges = self.sheet_ranges_exact(s);
            for k in integer_box(&ranges) {
                let rhs: Vec<i128> = (0..n).map(|j| wd * k[j] as i128 - wn[j]).collect();
                let num: Vec<i128> = (0..n)
                    .map(|i| (0..n).map(|j| nmat[i][j] * rhs[j]).sum())
                    .collect();
                if num.iter().any(|&v| v < 0 || v >= total) {
                    continue;
                }
                if let Some(h) = half_axis {
                    if 2 * num[h] >= total {
                        continue;
                    }
                }
                let x0: QVec = num.iter().map(|&v| Q::new(v, total)).collect();
                if !region.contains(&src, &x0) {
                    continue;
                }
                let alpha = DeckElement::new(s.eps, k);
                if let Some(rec) = self.make_record_exact(x0, alpha, domain) {
                    records.push(rec);
                }
            }
        }
        sort_records(&mut records);
        Ok(records)
    }

    fn sheet_ranges_exact(&self, s: &Sheet) -> Vec<(i64, i64)> {
        (0..s.shift.len())
            .map(|i| {
                let (mut a, mut b) = (s.shift[i], s.shift[i]);
                for j in 0..s.diff.ncols() {
                    let m = s.diff[(i, j)];
                    if m.is_positive() {
                        b += m;
                    } else {
                        a += m;
                    }
                }
                (a.ceil().to_integer() as i64, b.floor().to_integer() as i64)
            })
            .collect()
    }

    fn make_record_exact(
        &self,
        x0: QVec,
        alpha: DeckElement,
        domain: &DomainMarker,
    ) -> Option<CoincidenceRecord> {
        let src = self.source();
        let (lift_element, alpha) = match domain {
            DomainMarker::Full => (src.identity(), alpha),
            DomainMarker::Chart(b) => {
                let (_, gamma) = b.lift_into(src, &x0)?;
                let a = self.pair.act(&gamma, &alpha);
                (gamma, a)
            }
        };
        // affine lifts have constant Jacobians, so only the sheet of α matters
        let jac = self
            .sheets
            .iter()
            .find(|t| t.eps == alpha.eps)
            .expect("sheet for every eps")
            .diff
            .clone();
        let det = jac.det();
        let lift_sign = sign_q(&det);
        Some(self.finish_record(
            PointCoords::Exact(x0),
            lift_element,
            alpha,
            jac.to_f64_rows(),
            Some(jac),
            lift_sign,
            true,
            domain,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_record(
        &self,
        point: PointCoords,
        lift_element: DeckElement,
        alpha: DeckElement,
        jac_diff: Vec<Vec<f64>>,
        jac_diff_exact: Option<QMat>,
        lift_sign: i8,
        regular: bool,
        domain: &DomainMarker,
    ) -> CoincidenceRecord {
        let (class_rep, alignment, degenerate) = match domain {
            DomainMarker::Full => {
                let rep = self.pair.canonical(&alpha);
                let w = self
                    .pair
                    .same_class(&rep, &alpha)
                    .expect("canonical representative lies in the class");
                (rep, self.pair.alignment(&w), self.pair.is_degenerate(&alpha))
            }
            // simply connected domain: trivial deck group, every α is its own class
            DomainMarker::Chart(_) => (alpha.clone(), 1, false),
        };
        CoincidenceRecord {
            point,
            lift_element,
            class_element: alpha,
            class_rep,
            alignment,
            jac_diff,
            jac_diff_exact,
            regular,
            lift_sign: if regular { lift_sign } else { 0 },
            degenerate,
        }
    }

    fn residual(&self, s: &Sheet, k: &[i64], x: &[f64]) -> Vec<f64> {
        let fx = self.f.evaluate(x);
        let gx = self.g.evaluate(x);
        let d = self.f.target().linear_diag(s.eps);
        let tn = self.f.target().translation_part(&DeckElement::new(s.eps, vec![0; d.len()]));
        (0..d.len())
            .map(|i| gx[i] - d[i] as f64 * fx[i] - k[i] as f64 - to_f64(&tn[i]))
            .collect()
    }

    fn jac_h(&self, eps: u8, x: &[f64]) -> Vec<Vec<f64>> {
        let jf = self.f.jacobian(x);
        let jg = self.g.jacobian(x);
        let d = self.f.target().linear_diag(eps);
        jg.iter()
            .zip(&jf)
            .zip(&d)
            .map(|((rg, rf), &di)| rg.iter().zip(rf).map(|(a, b)| a - di as f64 * b).collect())
            .collect()
    }

    /// Subdivision plus Newton; works for any smooth lifts.
    pub fn find_numeric(&self, region: &OpenRegion, domain: &DomainMarker) -> Result<Vec<CoincidenceRecord>> {
        region.validate(self.source())?;
        let src = self.source().clone();
        let n = src.dim();
        let mut found: Vec<(Vec<f64>, DeckElement)> = Vec::new();
        if region.is_empty() {
            return Ok(Vec::new());
        }
        let lip: Vec<f64> = self
            .f
            .perturbation_lipschitz()
            .iter()
            .zip(self.g.perturbation_lipschitz())
            .map(|(a, b)| a + b)
            .collect();
        let min_r = 0.5 / self.opts.grid as f64;
        for alpha in self.candidates(region) {
            let s = self.sheets.iter().find(|s| s.eps == alpha.eps).unwrap();
            let row_lip: Vec<f64> = (0..n)
                .map(|i| s.diff_f[i].iter().map(|m| m.abs()).sum::<f64>() + lip[i])
                .collect();
            let mut stack = vec![(vec![0.5; n], 0.5f64)];
            let mut seeds = Vec::new();
            while let Some((c, r)) = stack.pop() {
                let h = self.residual(s, &alpha.k, &c);
                let excluded = h
                    .iter()
                    .zip(&row_lip)
                    .any(|(hi, l)| hi.abs() > l * r * (1.0 + 1e-12) + 1e-12);
                if excluded {
                    continue;
                }
                if r <= min_r {
                    seeds.push(c);
                    continue;
                }
                let hr = r / 2.0;
                for mask in 0..(1usize << n) {
                    let child: Vec<f64> = (0..n)
                        .map(|i| if mask >> i & 1 == 1 { c[i] + hr } else { c[i] - hr })
                        .collect();
                    stack.push((child, hr));
                }
            }
            for seed in seeds {
                let Some(root) = self.newton(s, &alpha.k, seed)? else {
                    continue;
                };
                let (x0, gamma) = src.reduce_f64(&root);
                // α at x0: g_#(γ)^-1 α f_#(γ)
                let a0 = self.pair.act(&src.inverse(&gamma), &alpha);
                if found
                    .iter()
                    .any(|(y, _)| src.quotient_distance(&x0, y) < self.opts.dedup_radius)
                {
                    continue;
                }
                found.push((x0, a0));
            }
        }
        let mut records = Vec::new();
        for (x0, alpha) in found {
            let margin = region.inner_margin_f64(&src, &x0);
            if margin.abs() < 1e-9 {
                return Err(Error::ToleranceNotMet(format!(
                    "coincidence at {x0:?} lies on the boundary of U within 1e-9"
                )));
            }
            if margin <= 0.0 {
                continue;
            }
            let (lift_element, alpha) = match domain {
                DomainMarker::Full => (src.identity(), alpha),
                DomainMarker::Chart(b) => {
                    let (_, gamma, inner) = b.lift_into_f64(&src, &x0);
                    if inner <= 0.0 {
                        continue;
                    }
                    let a = self.pair.act(&gamma, &alpha);
                    (gamma, a)
                }
            };
            let lift = src.apply_f64(&lift_element, &x0);
            let jac = self.jac_h(alpha.eps, &lift);
            let det = det_f64(&jac);
            if det.abs() <= self.opts.regular_threshold {
                return Err(Error::NonRegularPoint(format!(
                    "|det(Jg − A_α Jf)| = {det:.3e} at {x0:?}"
                )));
            }
            let sign = if det > 0.0 { 1 } else { -1 };
            records.push(self.finish_record(
                PointCoords::Float(x0),
                lift_element,
                alpha,
                jac,
                None,
                sign,
                true,
                domain,
            ));
        }
        sort_records(&mut records);
        Ok(records)
    }

    fn newton(&self, s: &Sheet, k: &[i64], start: Vec<f64>) -> Result<Option<Vec<f64>>> {
        let mut x = start.clone();
        let mut last_step = f64::INFINITY;
        for _ in 0..self.opts.max_newton {
            let h = self.residual(s, k, &x);
            let res = norm_inf(&h);
            let jac = self.jac_h(s.eps, &x);
            let Some(step) = solve_f64(&jac, &h) else {
                if res < self.opts.tol {
                    // a root where the Jacobian is singular
                    return Err(Error::NonRegularPoint(format!(
                        "singular Jacobian at a coincidence near {x:?}"
                    )));
                }
                return Ok(None);
            };
            let size = norm_inf(&step);
            if res < self.opts.tol && size < 1e-9 {
                // contraction has set in and the next correction is negligible
                return Ok(Some(x));
            }
            if size > 4.0 * last_step.max(1e-3) && size > 0.5 {
                return Ok(None);
            }
            for (xi, d) in x.iter_mut().zip(&step) {
                *xi -= d;
            }
            last_step = size;
            if norm_inf(&x.iter().zip(&start).map(|(a, b)| a - b).collect::<Vec<_>>()) > 2.0 {
                return Ok(None);
            }
        }
        let res = norm_inf(&self.residual(s, k, &x));
        if res < self.opts.tol {
            return Ok(Some(x));
        }
        if res < 1e-7 {
            return Err(Error::ToleranceNotMet(format!(
                "Newton stalled with residual {res:.3e} near {x:?}"
            )));
        }
        Ok(None)
    }

    /// Candidates over a closed upstairs box.
    pub fn candidates_in_box(&self, b: &OpenBox) -> Vec<DeckElement> {
        self.candidates_over(&vec_to_f64(&b.lo), &vec_to_f64(&b.hi))
    }

    pub fn f(&self) -> &EquivariantLift {
        &self.f
    }

    pub fn g(&self) -> &EquivariantLift {
        &self.g
    }
}

/// Deterministic output order: class representative, then coordinates.
pub fn sort_records(records: &mut [CoincidenceRecord]) {
    records.sort_by(|a, b| {
        a.class_rep
            .cmp(&b.class_rep)
            .then_with(|| a.point.cmp_coords(&b.point))
    });
}

pub fn find_coincidences_affine(
    f: &EquivariantLift,
    g: &EquivariantLift,
    region: &OpenRegion,
) -> Result<Vec<CoincidenceRecord>> {
    CoincidenceSolver::new(f, g, SolverOptions::default())?.find_affine(region, &DomainMarker::Full)
}

pub fn find_coincidences_numeric(
    f: &EquivariantLift,
    g: &EquivariantLift,
    region: &OpenRegion,
    tol: f64,
) -> Result<Vec<CoincidenceRecord>> {
    let opts = SolverOptions { tol, ..SolverOptions::default() };
    CoincidenceSolver::new(f, g, opts)?.find_numeric(region, &DomainMarker::Full)
}

pub fn candidate_deck_elements(
    f: &EquivariantLift,
    g: &EquivariantLift,
    region: &OpenRegion,
) -> Result<Vec<DeckElement>> {
    Ok(CoincidenceSolver::new(f, g, SolverOptions::default())?.candidates(region))
}

pub(crate) fn integer_box(ranges: &[(i64, i64)]) -> Vec<IntVec> {
    if ranges.iter().any(|(a, b)| a > b) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: IntVec = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(cur.clone());
        let mut i = 0;
        loop {
            if i == ranges.len() {
                return out;
            }
            if cur[i] < ranges[i].1 {
                cur[i] += 1;
                break;
            }
            cur[i] = ranges[i].0;
            i += 1;
        }
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn det_f64(rows: &[Vec<f64>]) -> f64 {
    to_dmatrix(rows).determinant()
}

pub fn solve_f64(rows: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let lu = to_dmatrix(rows).lu();
    let sol = lu.solve(&DVector::from_column_slice(b))?;
    sol.iter().all(|v| v.is_finite()).then(|| sol.iter().copied().collect())
}
