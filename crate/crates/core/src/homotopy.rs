//! Straight-line homotopies between lifts, their admissibility certificates, and
//! regularization of coincidence sets by small equivariant perturbations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coincidence_solver::{integer_box, CoincidenceSolver, SolverOptions};
use crate::equivariant_map::{random_equivariant_term, EquivariantLift};
use crate::error::{Error, Result};
use crate::flat_space::{DeckElement, DomainMarker, OpenBox, OpenRegion};
use crate::rational::{dyadic, vec_to_f64, Q};

/// `H_s = (1 − s) start + s end` for `s ∈ [0, 1]`, certified admissible over `region`
/// together with its partner homotopy.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleHomotopy {
    start: EquivariantLift,
    end: EquivariantLift,
    region: OpenRegion,
    /// Lower bound on the distance from `∂U` to the coincidence set of every slice.
    margin: f64,
}

impl AdmissibleHomotopy {
    pub fn start(&self) -> &EquivariantLift {
        &self.start
    }

    pub fn end(&self) -> &EquivariantLift {
        &self.end
    }

    pub fn region(&self) -> &OpenRegion {
        &self.region
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn is_constant(&self) -> bool {
        self.start == self.end
    }

    /// The slice at time `s`; carries the same hom as both endpoints.
    pub fn at(&self, s: Q) -> EquivariantLift {
        self.start.interpolate(&self.end, s)
    }
}

const MAX_CELLS: usize = 400_000;
const MIN_HALF_WIDTH: f64 = 1e-5;

/// Certifies that `(F_s, G_s)` has no coincidence on `∂U` for any `s`, returning both
/// homotopies and the verified margin.
pub fn certify_homotopy(
    f0: &EquivariantLift,
    f1: &EquivariantLift,
    g0: &EquivariantLift,
    g1: &EquivariantLift,
    region: &OpenRegion,
) -> Result<(AdmissibleHomotopy, AdmissibleHomotopy)> {
    if f0.hom() != f1.hom() || g0.hom() != g1.hom() {
        return Err(Error::NotAdmissible("a homotopy of lifts keeps the induced homomorphism".into()));
    }
    let margin = match region {
        // a closed manifold: compactness is automatic
        OpenRegion::Full => f64::INFINITY,
        OpenRegion::Boxes(boxes) => {
            let opts = SolverOptions::default();
            let s0 = CoincidenceSolver::new(f0, g0, opts)?;
            let s1 = CoincidenceSolver::new(f1, g1, opts)?;
            let mut margin = f64::INFINITY;
            for b in boxes {
                margin = margin.min(certify_box(&s0, &s1, b)?);
            }
            margin
        }
    };
    let mk = |a: &EquivariantLift, b: &EquivariantLift| AdmissibleHomotopy {
        start: a.clone(),
        end: b.clone(),
        region: region.clone(),
        margin,
    };
    Ok((mk(f0, f1), mk(g0, g1)))
}

/// A constant homotopy, certified like any other.
pub fn constant_homotopy(
    f: &EquivariantLift,
    g: &EquivariantLift,
    region: &OpenRegion,
) -> Result<(AdmissibleHomotopy, AdmissibleHomotopy)> {
    certify_homotopy(f, f, g, g, region)
}

fn certify_box(s0: &CoincidenceSolver, s1: &CoincidenceSolver, b: &OpenBox) -> Result<f64> {
    let n = b.dim();
    let lo = vec_to_f64(&b.lo);
    let hi = vec_to_f64(&b.hi);
    // the residual of the interpolated pair is the interpolated residual, so k ranges merge
    let r0 = s0.k_ranges_over(&lo, &hi);
    let r1 = s1.k_ranges_over(&lo, &hi);
    let mut margin = f64::INFINITY;
    let mut budget = MAX_CELLS;
    for ((eps, a), (_, c)) in r0.iter().zip(&r1) {
        let ranges: Vec<(i64, i64)> = a.iter().zip(c).map(|(x, y)| (x.0.min(y.0), x.1.max(y.1))).collect();
        let lip: Vec<f64> = s0
            .row_lipschitz(*eps)
            .iter()
            .zip(s1.row_lipschitz(*eps))
            .map(|(x, y)| x.max(y))
            .collect();
        for k in integer_box(&ranges) {
            let alpha = DeckElement::new(*eps, k);
            for axis in 0..n {
                for side in [lo[axis], hi[axis]] {
                    let m = certify_face(s0, s1, &alpha, &lip, &lo, &hi, axis, side, &mut budget)?;
                    margin = margin.min(m);
                }
            }
        }
    }
    Ok(margin)
}

#[allow(clippy::too_many_arguments)]
fn certify_face(
    s0: &CoincidenceSolver,
    s1: &CoincidenceSolver,
    alpha: &DeckElement,
    lip: &[f64],
    lo: &[f64],
    hi: &[f64],
    axis: usize,
    side: f64,
    budget: &mut usize,
) -> Result<f64> {
    let n = lo.len();
    let free: Vec<usize> = (0..n).filter(|&i| i != axis).collect();
    let mut center: Vec<f64> = (0..n).map(|i| (lo[i] + hi[i]) / 2.0).collect();
    center[axis] = side;
    let half: Vec<f64> = (0..n)
        .map(|i| if i == axis { 0.0 } else { (hi[i] - lo[i]) / 2.0 })
        .collect();
    let mut stack = vec![(center, half, 0.5f64, 0.5f64)];
    let mut margin = f64::INFINITY;
    while let Some((c, h, sc, rs)) = stack.pop() {
        if *budget == 0 {
            return Err(Error::NotAdmissible("certificate budget exhausted".into()));
        }
        *budget -= 1;
        let rx = h.iter().cloned().fold(0.0, f64::max);
        let h0 = s0.residual_for(alpha, &c);
        let h1 = s1.residual_for(alpha, &c);
        let mut best: Option<f64> = None;
        for i in 0..n {
            let val = (1.0 - sc) * h0[i] + sc * h1[i];
            let drift = (h1[i] - h0[i]).abs() * rs;
            let slack = val.abs() - drift - lip[i] * rx;
            if slack > 1e-12 * (1.0 + val.abs()) {
                let d = if lip[i] > 0.0 { slack / lip[i] } else { f64::INFINITY };
                best = Some(best.map_or(d, |b: f64| b.max(d)));
            }
        }
        if let Some(d) = best {
            margin = margin.min(d);
            continue;
        }
        if rx < MIN_HALF_WIDTH && rs < MIN_HALF_WIDTH {
            return Err(Error::NotAdmissible(format!(
                "coincidence of class {alpha} meets the boundary of U near {c:?} at time {sc:.4}"
            )));
        }
        // split the free coordinates and time
        let split_time = rs >= rx;
        let split_axes: Vec<usize> = free.iter().copied().filter(|&i| h[i] >= rx / 2.0).collect();
        let mut children = vec![(c.clone(), h.clone(), sc, rs)];
        for &i in &split_axes {
            children = children
                .into_iter()
                .flat_map(|(cc, hh, s, r)| {
                    let mut hh2 = hh.clone();
                    hh2[i] /= 2.0;
                    let mut a = cc.clone();
                    let mut b = cc;
                    a[i] -= hh2[i];
                    b[i] += hh2[i];
                    [(a, hh2.clone(), s, r), (b, hh2, s, r)]
                })
                .collect();
        }
        if split_time || split_axes.is_empty() {
            children = children
                .into_iter()
                .flat_map(|(cc, hh, s, r)| [(cc.clone(), hh.clone(), s - r / 2.0, r / 2.0), (cc, hh, s + r / 2.0, r / 2.0)])
                .collect();
        }
        stack.extend(children);
    }
    Ok(margin)
}

/// Output of [`regularize`].
#[derive(Debug, Clone)]
pub struct Regularization {
    pub f: EquivariantLift,
    pub g: EquivariantLift,
    pub homotopy_f: AdmissibleHomotopy,
    pub homotopy_g: AdmissibleHomotopy,
    /// Perturbation attempts used; 0 when the pair was already regular.
    pub attempts: usize,
}

pub const MAX_REGULARIZE_ATTEMPTS: usize = 24;

fn is_regular_pair(f: &EquivariantLift, g: &EquivariantLift, region: &OpenRegion, opts: SolverOptions) -> Result<bool> {
    let solver = CoincidenceSolver::new(f, g, opts)?;
    match solver.find(region, &DomainMarker::Full) {
        Ok(recs) => Ok(recs.iter().all(|r| r.regular)),
        Err(
            Error::SingularPair(_) | Error::NonRegularPoint(_) | Error::ToleranceNotMet(_),
        ) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Perturbs `g` by small equivariant terms until every coincidence in `U` is regular.
///
/// Offset shifts along directions fixed by every image of `g_#` are tried first, then random
/// trigonometric terms. The homotopy from `g` to the result is certified admissible on `U`.
pub fn regularize(
    f: &EquivariantLift,
    g: &EquivariantLift,
    region: &OpenRegion,
    seed: u64,
    opts: SolverOptions,
) -> Result<Regularization> {
    if is_regular_pair(f, g, region, opts)? {
        let (hf, hg) = constant_homotopy(f, g, region)?;
        return Ok(Regularization {
            f: f.clone(),
            g: g.clone(),
            homotopy_f: hf,
            homotopy_g: hg,
            attempts: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = g.free_offset_axes();
    let n = g.target().dim();
    let scale = 0.02;
    let mut last_err = None;
    for attempt in 1..=MAX_REGULARIZE_ATTEMPTS {
        let candidate = if attempt <= MAX_REGULARIZE_ATTEMPTS / 3 && !axes.is_empty() {
            let mut v = g.offset().clone();
            for &i in &axes {
                v[i] += dyadic(rng.random_range(-scale..scale), 24);
            }
            g.with_offset(v)?
        } else {
            let mut terms = g.terms().to_vec();
            for _ in 0..n {
                if let Some(t) = random_equivariant_term(g.hom(), &mut rng, scale) {
                    terms.push(t);
                }
            }
            g.with_terms(terms)?
        };
        match certify_homotopy(f, f, g, &candidate, region) {
            Ok((hf, hg)) => {
                if is_regular_pair(f, &candidate, region, opts)? {
                    return Ok(Regularization {
                        f: f.clone(),
                        g: candidate,
                        homotopy_f: hf,
                        homotopy_g: hg,
                        attempts: attempt,
                    });
                }
            }
            Err(e @ Error::NotAdmissible(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    match last_err {
        Some(e) if !matches!(region, OpenRegion::Full) => Err(e),
        _ => Err(Error::RegularizationFailed {
            attempts: MAX_REGULARIZE_ATTEMPTS,
        }),
    }
}
