//! Human-readable tables plus a fenced machine block.
//!
//! The machine block is TOML between [`BEGIN`] and [`END`] lines and holds exactly the values
//! printed in the table above it; [`parse_machine_block`] reads it back.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coincidence_solver::CoincidenceRecord;
use crate::flat_space::DeckElement;
use crate::invariants::{local_index, semi_index, Coefficient, Evaluation, IndexValue};
use crate::lattice::IntVec;
use crate::orientation_system::OrientationChoice;
use crate::twisted_conjugacy::ReidemeisterClassSet;

pub const BEGIN: &str = "-----BEGIN NIELSEN REPORT-----";
pub const END: &str = "-----END NIELSEN REPORT-----";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub eps: u8,
    pub k: IntVec,
    pub degenerate: bool,
    /// `"3"` for an integer coefficient, `"1 mod 2"` for a residue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub x: Vec<f64>,
    pub class_eps: u8,
    pub class_k: IntVec,
    pub degenerate: bool,
    pub lift_sign: i8,
    pub z: i64,
    pub z2: u8,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MachineReport {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nielsen_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularized: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointRow>,
}

impl MachineReport {
    pub fn to_block(&self) -> String {
        format!("{BEGIN}\n{}{END}\n", toml::to_string(self).expect("report serializes"))
    }
}

/// Extracts and parses the fenced block from a full report.
pub fn parse_machine_block(text: &str) -> Option<MachineReport> {
    let start = text.find(BEGIN)? + BEGIN.len();
    let end = text[start..].find(END)? + start;
    toml::from_str(&text[start..end]).ok()
}

fn coefficient_text(c: &Coefficient) -> String {
    match c {
        Coefficient::Z(z) => z.to_string(),
        Coefficient::Z2(b) => format!("{b} mod 2"),
    }
}

fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.9}")).collect();
    format!("({})", parts.join(", "))
}

pub fn classes_report(set: &ReidemeisterClassSet) -> (String, MachineReport) {
    let mut out = String::new();
    let rows: Vec<ClassRow> = set
        .representatives
        .iter()
        .zip(&set.degenerate_flags)
        .map(|(r, &d)| ClassRow {
            eps: r.eps,
            k: r.k.clone(),
            degenerate: d,
            coefficient: None,
        })
        .collect();
    if set.finite {
        let _ = writeln!(out, "Reidemeister classes: {} (finite)", set.representatives.len());
        let _ = writeln!(out, "{:<24} degenerate", "representative");
        for (r, d) in set.representatives.iter().zip(&set.degenerate_flags) {
            let _ = writeln!(out, "{:<24} {}", r.to_string(), if *d { "yes" } else { "no" });
        }
    } else {
        let _ = writeln!(out, "Reidemeister classes: infinite");
    }
    let m = MachineReport {
        command: "classes".into(),
        finite: Some(set.finite),
        class_count: set.count(),
        classes: rows,
        ..Default::default()
    };
    (out, m)
}

fn point_rows(records: &[CoincidenceRecord], o: &OrientationChoice) -> Vec<PointRow> {
    records
        .iter()
        .map(|r| {
            let v = local_index(r, o).expect("evaluated records are regular");
            PointRow {
                x: r.point.to_f64(),
                class_eps: r.class_rep.eps,
                class_k: r.class_rep.k.clone(),
                degenerate: r.degenerate,
                lift_sign: r.lift_sign,
                z: v.z,
                z2: v.z2,
            }
        })
        .collect()
}

pub fn index_report(e: &Evaluation, o: &OrientationChoice) -> (String, MachineReport) {
    let mut out = String::new();
    if let Some(r) = &e.regularization {
        if r.attempts > 0 {
            let _ = writeln!(out, "regularized g after {} attempt(s): {}", r.attempts, e.g);
        }
    }
    let _ = writeln!(out, "coincidence points: {}", e.records.len());
    let _ = writeln!(
        out,
        "{:<36} {:<20} {:<10} {:>9} {:>7}",
        "point", "class", "degenerate", "lift sign", "index"
    );
    let rows = point_rows(&e.records, o);
    for (r, row) in e.records.iter().zip(&rows) {
        let _ = writeln!(
            out,
            "{:<36} {:<20} {:<10} {:>9} {:>7}",
            fmt_point(&row.x),
            r.class_rep.to_string(),
            if row.degenerate { "yes" } else { "no" },
            row.lift_sign,
            IndexValue::new(row.z, row.z2).to_string()
        );
    }
    let _ = writeln!(out, "index (z, z2) = {}", e.index);
    let _ = writeln!(out, "semi-index = {}", e.semi_index());
    let m = MachineReport {
        command: "index".into(),
        index: Some(e.index),
        semi_index: Some(e.semi_index()),
        regularized: Some(e.regularization.as_ref().is_some_and(|r| r.attempts > 0)),
        points: rows,
        ..Default::default()
    };
    (out, m)
}

pub fn trace_report(e: &Evaluation, degenerate: impl Fn(&DeckElement) -> bool) -> (String, MachineReport) {
    let mut out = String::new();
    if let Some(r) = &e.regularization {
        if r.attempts > 0 {
            let _ = writeln!(out, "regularized g after {} attempt(s): {}", r.attempts, e.g);
        }
    }
    let _ = writeln!(out, "{:<24} {:<10} coefficient", "class", "degenerate");
    let mut rows = Vec::new();
    for (rep, c) in e.trace.entries() {
        let d = degenerate(rep);
        let _ = writeln!(
            out,
            "{:<24} {:<10} {}",
            rep.to_string(),
            if d { "yes" } else { "no" },
            coefficient_text(c)
        );
        rows.push(ClassRow {
            eps: rep.eps,
            k: rep.k.clone(),
            degenerate: d,
            coefficient: Some(coefficient_text(c)),
        });
    }
    let eps = e.trace.epsilon();
    let check = if eps == e.index { "ok" } else { "MISMATCH" };
    let _ = writeln!(out, "epsilon(trace) = {eps}, index = {} [{check}]", e.index);
    let _ = writeln!(out, "semi-index = {}", semi_index(e.index));
    let _ = writeln!(out, "nielsen count = {}", e.trace.nielsen_count());
    let m = MachineReport {
        command: "trace".into(),
        index: Some(e.index),
        semi_index: Some(semi_index(e.index)),
        nielsen_count: Some(e.trace.nielsen_count()),
        regularized: Some(e.regularization.as_ref().is_some_and(|r| r.attempts > 0)),
        classes: rows,
        ..Default::default()
    };
    (out, m)
}
