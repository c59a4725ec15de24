//! TOML problem descriptions.
//!
//! Rationals are written as strings `"p/q"` (plain integers are accepted too). A minimal
//! circle problem:
//!
//! ```toml
//! [source]
//! kind = "torus"
//! dim = 1
//!
//! [target]
//! kind = "torus"
//! dim = 1
//!
//! [f]
//! matrix = [[3]]
//!
//! [g]
//! matrix = [[1]]
//! ```
//!
//! Serialization always writes the explicit form (`images`, `linear`, `offset`, `terms`), so a
//! parsed config re-serializes to a canonical text that parses back to the same problem.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coincidence_solver::{SolverMode, SolverOptions};
use crate::equivariant_map::{EquivariantLift, InducedHom, TrigTerm};
use crate::error::{Error, Result};
use crate::flat_space::{DeckElement, DomainMarker, FlatManifold, ManifoldKind, OpenBox, OpenRegion};
use crate::invariants::Problem;
use crate::lattice::IntVec;
use crate::orientation_system::{OrientationChoice, OrientationScope};
use crate::rational::{format_q, parse_q, QMat, QVec, Q};

/// A fully validated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub f: EquivariantLift,
    pub g: EquivariantLift,
    pub region: OpenRegion,
    pub domain: DomainMarker,
    pub orientation: OrientationChoice,
    pub solver: SolverOptions,
}

impl ProblemConfig {
    pub fn new(f: EquivariantLift, g: EquivariantLift) -> Self {
        ProblemConfig {
            f,
            g,
            region: OpenRegion::Full,
            domain: DomainMarker::Full,
            orientation: OrientationChoice::default(),
            solver: SolverOptions::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let path = e.span().map_or("<input>".to_string(), |s| {
                let line = text[..s.start].matches('\n').count() + 1;
                format!("line {line}")
            });
            Error::config(path, e.message().to_string())
        })?;
        raw.build()
    }

    pub fn to_toml(&self) -> String {
        let raw = RawConfig::from_config(self);
        toml::to_string(&raw).expect("config serializes")
    }

    pub fn problem(&self) -> Problem {
        Problem {
            f: self.f.clone(),
            g: self.g.clone(),
            region: self.region.clone(),
            domain: self.domain.clone(),
            orientation: self.orientation.clone(),
            solver: self.solver,
            regularize_seed: None,
        }
    }
}

/// Parses a domain marker flag: `full`, or `lo1,lo2,..:hi1,hi2,..` for a chart box.
pub fn parse_domain_marker(s: &str) -> Result<DomainMarker> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("full") {
        return Ok(DomainMarker::Full);
    }
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::config("--domain-marker", "expected `full` or `lo,..:hi,..`"))?;
    let parse = |part: &str| -> Result<QVec> {
        part.split(',')
            .map(|x| parse_q(x).ok_or_else(|| Error::config("--domain-marker", format!("bad rational `{x}`"))))
            .collect()
    };
    let b = OpenBox::new(parse(lo)?, parse(hi)?).map_err(|e| Error::config("--domain-marker", e.to_string()))?;
    Ok(DomainMarker::Chart(b))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawQ {
    Int(i64),
    Str(String),
}

impl RawQ {
    fn get(&self, path: &str) -> Result<Q> {
        match self {
            RawQ::Int(i) => Ok(Q::from(*i as i128)),
            RawQ::Str(s) => parse_q(s).ok_or_else(|| Error::config(path, format!("`{s}` is not a rational p/q"))),
        }
    }

    fn from_q(x: &Q) -> Self {
        RawQ::Str(format_q(x))
    }
}

fn qvec(v: &[RawQ], path: &str) -> Result<QVec> {
    v.iter().enumerate().map(|(i, x)| x.get(&format!("{path}[{i}]"))).collect()
}

fn raw_vec(v: &[Q]) -> Vec<RawQ> {
    v.iter().map(RawQ::from_q).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifold {
    kind: ManifoldKind,
    dim: usize,
    /// Diagonal of the glide's linear part.
    #[serde(rename = "D", alias = "linear", default, skip_serializing_if = "Option::is_none")]
    linear: Option<Vec<i8>>,
    /// Glide translation.
    #[serde(rename = "t", alias = "translation", default, skip_serializing_if = "Option::is_none")]
    translation: Option<Vec<RawQ>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl RawManifold {
    fn build(&self, path: &str) -> Result<FlatManifold> {
        let t = self
            .translation
            .as_ref()
            .map(|t| qvec(t, &format!("{path}.t")))
            .transpose()?;
        let label = self.label.clone().unwrap_or_else(|| match self.kind {
            ManifoldKind::Torus => format!("T{}", self.dim),
            ManifoldKind::Glide => {
                if self.dim == 2
                    && self.linear.as_deref() == Some(&[1, -1])
                    && t.as_deref() == Some(&[Q::new(1, 2), Q::from(0)])
                {
                    "K".into()
                } else {
                    format!("G{}", self.dim)
                }
            }
        });
        FlatManifold::new(self.dim, self.kind, self.linear.clone(), t, label).map_err(|e| {
            let field = match &e {
                Error::InvalidGlide(m) if m.starts_with("D ") || m.ends_with(" D") => format!("{path}.D"),
                Error::InvalidGlide(m) if m.contains('t') && !m.contains("torus") => format!("{path}.t"),
                Error::DimensionMismatch(_) => format!("{path}.dim"),
                _ => path.to_string(),
            };
            Error::config(field, e.to_string())
        })
    }

    fn from_manifold(m: &FlatManifold) -> Self {
        RawManifold {
            kind: m.kind(),
            dim: m.dim(),
            linear: m.glide().map(|g| g.linear.clone()),
            translation: m.glide().map(|g| raw_vec(&g.translation)),
            label: Some(m.label().to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeck {
    #[serde(default)]
    eps: u8,
    k: IntVec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    amplitude: Vec<RawQ>,
    frequency: IntVec,
    #[serde(default = "zero_q")]
    phase: RawQ,
}

fn zero_q() -> RawQ {
    RawQ::Int(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLift {
    /// Torus shortcut: the integer matrix of the hom, also the default linear part.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<IntVec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    images: Option<Vec<RawDeck>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linear: Option<Vec<Vec<RawQ>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    offset: Option<Vec<RawQ>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    terms: Vec<RawTerm>,
}

impl RawLift {
    fn build(&self, path: &str, src: &FlatManifold, tgt: &FlatManifold) -> Result<EquivariantLift> {
        let wrap = |e: Error| match e {
            Error::Config { .. } => e,
            other => Error::config(path, other.to_string()),
        };
        let hom = match (&self.images, &self.matrix) {
            (Some(images), _) => {
                let images = images.iter().map(|d| DeckElement::new(d.eps, d.k.clone())).collect();
                InducedHom::new(src.clone(), tgt.clone(), images).map_err(wrap)?
            }
            (None, Some(m)) => InducedHom::from_matrix(src.clone(), tgt.clone(), m).map_err(wrap)?,
            (None, None) => return Err(Error::config(path, "needs `images` or `matrix`")),
        };
        let linear = match (&self.linear, &self.matrix) {
            (Some(rows), _) => {
                let rows: Vec<QVec> = rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| qvec(r, &format!("{path}.linear[{i}]")))
                    .collect::<Result<_>>()?;
                if rows.iter().any(|r| r.len() != src.dim()) || rows.len() != tgt.dim() {
                    return Err(Error::config(format!("{path}.linear"), "wrong shape"));
                }
                QMat::from_rows(&rows)
            }
            (None, Some(m)) => QMat::from_int_rows(m),
            (None, None) => return Err(Error::config(path, "needs `linear` unless `matrix` is given")),
        };
        let offset = match &self.offset {
            Some(v) => qvec(v, &format!("{path}.offset"))?,
            None => vec![Q::from(0); tgt.dim()],
        };
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let p = format!("{path}.terms[{i}]");
                Ok(TrigTerm::new(
                    qvec(&t.amplitude, &format!("{p}.amplitude"))?,
                    t.frequency.clone(),
                    t.phase.get(&format!("{p}.phase"))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        EquivariantLift::new(hom, linear, offset, terms).map_err(wrap)
    }

    fn from_lift(l: &EquivariantLift) -> Self {
        RawLift {
            matrix: None,
            images: Some(
                l.hom()
                    .images()
                    .iter()
                    .map(|d| RawDeck { eps: d.eps, k: d.k.clone() })
                    .collect(),
            ),
            linear: Some(l.linear().to_rows().iter().map(|r| raw_vec(r)).collect()),
            offset: Some(raw_vec(l.offset())),
            terms: l
                .terms()
                .iter()
                .map(|t| RawTerm {
                    amplitude: raw_vec(&t.amplitude),
                    frequency: t.frequency.clone(),
                    phase: RawQ::from_q(&t.phase),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    lo: Vec<RawQ>,
    hi: Vec<RawQ>,
}

impl RawBox {
    fn build(&self, path: &str) -> Result<OpenBox> {
        OpenBox::new(qvec(&self.lo, &format!("{path}.lo"))?, qvec(&self.hi, &format!("{path}.hi"))?)
            .map_err(|e| Error::config(path, e.to_string()))
    }

    fn from_box(b: &OpenBox) -> Self {
        RawBox { lo: raw_vec(&b.lo), hi: raw_vec(&b.hi) }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    full: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boxes: Option<Vec<RawBox>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chart: Option<RawBox>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassSign {
    #[serde(default)]
    eps: u8,
    k: IntVec,
    sign: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrientation {
    #[serde(default = "default_scope")]
    scope: String,
    #[serde(default = "default_sign")]
    sign: i8,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    classes: Vec<RawClassSign>,
}

fn default_scope() -> String {
    "per-class".into()
}

fn default_sign() -> i8 {
    1
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dedup_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    regular_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_newton: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    source: RawManifold,
    target: RawManifold,
    f: RawLift,
    g: RawLift,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    region: Option<RawRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<RawDomain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orientation: Option<RawOrientation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<RawSolver>,
}

impl RawConfig {
    fn build(&self) -> Result<ProblemConfig> {
        let src = self.source.build("source")?;
        let tgt = self.target.build("target")?;
        let f = self.f.build("f", &src, &tgt)?;
        let g = self.g.build("g", &src, &tgt)?;
        let region = match &self.region {
            None => OpenRegion::Full,
            Some(RawRegion { full: Some(true), boxes: None }) => OpenRegion::Full,
            Some(RawRegion { full: None | Some(false), boxes: Some(bs) }) => OpenRegion::Boxes(
                bs.iter()
                    .enumerate()
                    .map(|(i, b)| b.build(&format!("region.boxes[{i}]")))
                    .collect::<Result<_>>()?,
            ),
            Some(_) => return Err(Error::config("region", "give either `full = true` or `boxes`")),
        };
        region
            .validate(&src)
            .map_err(|e| Error::config("region", e.to_string()))?;
        let domain = match self.domain.as_ref().and_then(|d| d.chart.as_ref()) {
            None => DomainMarker::Full,
            Some(b) => DomainMarker::chart(&src, b.build("domain.chart")?)
                .map_err(|e| Error::config("domain.chart", e.to_string()))?,
        };
        let orientation = match &self.orientation {
            None => OrientationChoice::default(),
            Some(o) => {
                if o.sign != 1 && o.sign != -1 {
                    return Err(Error::config("orientation.sign", "must be 1 or -1"));
                }
                match o.scope.as_str() {
                    "global" => {
                        if !o.classes.is_empty() {
                            return Err(Error::config("orientation.classes", "global scope takes no class table"));
                        }
                        if !g.hom().is_orientation_true() {
                            return Err(Error::config(
                                "orientation.scope",
                                "global orientation needs g to be orientation true",
                            ));
                        }
                        OrientationChoice::global(o.sign)
                    }
                    "per-class" => {
                        let mut table = BTreeMap::new();
                        for (i, c) in o.classes.iter().enumerate() {
                            if c.sign != 1 && c.sign != -1 {
                                return Err(Error::config(format!("orientation.classes[{i}].sign"), "must be 1 or -1"));
                            }
                            table.insert(DeckElement::new(c.eps, c.k.clone()), c.sign);
                        }
                        let base = OrientationChoice::per_class(table);
                        if o.sign == -1 {
                            // default sign -1: negate everything, then restore listed entries
                            let mut n = base.negate();
                            for c in &o.classes {
                                n = n.with_class(DeckElement::new(c.eps, c.k.clone()), c.sign);
                            }
                            n
                        } else {
                            base
                        }
                    }
                    other => {
                        return Err(Error::config(
                            "orientation.scope",
                            format!("unknown scope `{other}` (expected global or per-class)"),
                        ))
                    }
                }
            }
        };
        let mut solver = SolverOptions::default();
        if let Some(s) = &self.solver {
            if let Some(m) = &s.mode {
                solver.mode = parse_mode(m).ok_or_else(|| {
                    Error::config("solver.mode", format!("unknown mode `{m}` (auto, exact, numeric)"))
                })?;
            }
            if let Some(t) = s.tol {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Error::config("solver.tol", "must be positive"));
                }
                solver.tol = t;
            }
            if let Some(g) = s.grid {
                if g == 0 {
                    return Err(Error::config("solver.grid", "must be positive"));
                }
                solver.grid = g;
            }
            if let Some(r) = s.dedup_radius {
                solver.dedup_radius = r;
            }
            if let Some(r) = s.regular_threshold {
                solver.regular_threshold = r;
            }
            if let Some(m) = s.max_newton {
                solver.max_newton = m;
            }
        }
        Ok(ProblemConfig {
            f,
            g,
            region,
            domain,
            orientation,
            solver,
        })
    }

    fn from_config(c: &ProblemConfig) -> Self {
        let region = match &c.region {
            OpenRegion::Full => RawRegion { full: Some(true), boxes: None },
            OpenRegion::Boxes(bs) => RawRegion {
                full: None,
                boxes: Some(bs.iter().map(RawBox::from_box).collect()),
            },
        };
        let domain = match &c.domain {
            DomainMarker::Full => None,
            DomainMarker::Chart(b) => Some(RawDomain { chart: Some(RawBox::from_box(b)) }),
        };
        let o = &c.orientation;
        let orientation = RawOrientation {
            scope: match o.scope() {
                OrientationScope::Global => "global".into(),
                OrientationScope::PerClass => "per-class".into(),
            },
            sign: o.default_sign(),
            classes: o
                .table()
                .iter()
                .map(|(k, &sign)| RawClassSign { eps: k.eps, k: k.k.clone(), sign })
                .collect(),
        };
        let s = &c.solver;
        RawConfig {
            source: RawManifold::from_manifold(c.f.source()),
            target: RawManifold::from_manifold(c.f.target()),
            f: RawLift::from_lift(&c.f),
            g: RawLift::from_lift(&c.g),
            region: Some(region),
            domain,
            orientation: Some(orientation),
            solver: Some(RawSolver {
                mode: Some(mode_name(s.mode).into()),
                tol: Some(s.tol),
                grid: Some(s.grid),
                dedup_radius: Some(s.dedup_radius),
                regular_threshold: Some(s.regular_threshold),
                max_newton: Some(s.max_newton),
            }),
        }
    }
}

pub fn parse_mode(s: &str) -> Option<SolverMode> {
    match s {
        "auto" => Some(SolverMode::Auto),
        "exact" => Some(SolverMode::Exact),
        "numeric" => Some(SolverMode::Numeric),
        _ => None,
    }
}

pub fn mode_name(m: SolverMode) -> &'static str {
    match m {
        SolverMode::Auto => "auto",
        SolverMode::Exact => "exact",
        SolverMode::Numeric => "numeric",
    }
}
