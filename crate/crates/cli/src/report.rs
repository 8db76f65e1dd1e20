//! Emitted documents. Information values carry the requested units; costs,
//! slacks and budgets stay in the units of the constraint table.

use std::fmt::Write as _;

use serde::Serialize;

use crate::problem::{ClassName, ProblemFile, Units};

pub trait Report: Serialize {
    /// Header row followed by one record per result or grid point.
    fn csv(&self) -> String;

    fn json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports always serialize");
        text.push('\n');
        text
    }
}

/// Shortest round-trip form, with an exponent for very small or large values.
fn num(v: f64) -> String {
    if v.is_finite() {
        serde_json::to_string(&v).expect("finite floats serialize")
    } else {
        v.to_string()
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[derive(Serialize)]
pub struct ComputeReport {
    pub command: &'static str,
    pub units: Units,
    pub sum_form: f64,
    pub divergence_form: f64,
    pub formula_gap: f64,
    pub per_step_terms: Vec<f64>,
    pub normalized: Option<f64>,
}

impl Report for ComputeReport {
    fn csv(&self) -> String {
        let mut header = vec!["sum_form".to_string(), "divergence_form".into(), "formula_gap".into(), "normalized".into()];
        header.extend((0..self.per_step_terms.len()).map(|i| format!("step_{i}")));
        let mut row = vec![
            num(self.sum_form),
            num(self.divergence_form),
            num(self.formula_gap),
            cell(self.normalized),
        ];
        row.extend(self.per_step_terms.iter().copied().map(num));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        table(&header, &[row])
    }
}

#[derive(Serialize)]
pub struct GridCheck {
    pub resolution: usize,
    pub value: f64,
}

#[derive(Serialize)]
pub struct CapacityReport {
    pub command: &'static str,
    pub units: Units,
    pub kernel_class: ClassName,
    pub value: f64,
    pub normalized: f64,
    pub iterations: usize,
    pub converged: bool,
    pub budget: Option<f64>,
    pub constraint_slack: Option<f64>,
    pub multiplier: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridCheck>,
    /// Optimal input kernel, one row-major table per step.
    pub argmax: Vec<Vec<f64>>,
}

impl Report for CapacityReport {
    fn csv(&self) -> String {
        table(
            &[
                "value",
                "normalized",
                "iterations",
                "converged",
                "budget",
                "constraint_slack",
                "multiplier",
                "grid_value",
            ],
            &[vec![
                num(self.value),
                num(self.normalized),
                self.iterations.to_string(),
                self.converged.to_string(),
                cell(self.budget),
                cell(self.constraint_slack),
                cell(self.multiplier),
                cell(self.grid.as_ref().map(|g| g.value)),
            ]],
        )
    }
}

#[derive(Serialize)]
pub struct NrdfPoint {
    pub budget: f64,
    pub value: f64,
    pub normalized: f64,
    pub iterations: usize,
    pub converged: bool,
    pub distortion_slack: f64,
    pub multiplier: Option<f64>,
}

const NRDF_HEADER: [&str; 7] = [
    "budget",
    "value",
    "normalized",
    "iterations",
    "converged",
    "distortion_slack",
    "multiplier",
];

impl NrdfPoint {
    fn row(&self) -> Vec<String> {
        vec![
            num(self.budget),
            num(self.value),
            num(self.normalized),
            self.iterations.to_string(),
            self.converged.to_string(),
            num(self.distortion_slack),
            cell(self.multiplier),
        ]
    }
}

#[derive(Serialize)]
pub struct NrdfReport {
    pub command: &'static str,
    pub units: Units,
    #[serde(flatten)]
    pub point: NrdfPoint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridCheck>,
    /// Optimal reconstruction kernel, one row-major table per step.
    pub argmin: Vec<Vec<f64>>,
}

impl Report for NrdfReport {
    fn csv(&self) -> String {
        let mut header = NRDF_HEADER.to_vec();
        header.push("grid_value");
        let mut row = self.point.row();
        row.push(cell(self.grid.as_ref().map(|g| g.value)));
        table(&header, &[row])
    }
}

#[derive(Serialize)]
pub struct CurveReport {
    pub command: &'static str,
    pub units: Units,
    pub curve: Vec<NrdfPoint>,
    /// Largest rise between consecutive budgets.
    pub max_increase: f64,
    /// Largest excess of a point over the chord of its neighbours.
    pub max_chord_excess: f64,
}

impl Report for CurveReport {
    fn csv(&self) -> String {
        let rows: Vec<Vec<String>> = self.curve.iter().map(NrdfPoint::row).collect();
        table(&NRDF_HEADER, &rows)
    }
}

#[derive(Serialize)]
pub struct Counterexample {
    pub label: String,
    /// Replayable problem files, one per (backward, forward) pair of the instance.
    pub files: Vec<ProblemFile>,
}

#[derive(Serialize)]
pub struct PropertyOutcome {
    pub property: &'static str,
    pub instances: usize,
    pub worst: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub properties: Vec<PropertyOutcome>,
}

impl Report for VerifyReport {
    fn csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .properties
            .iter()
            .map(|p| {
                vec![
                    p.property.to_string(),
                    p.instances.to_string(),
                    num(p.worst),
                    num(p.threshold),
                    p.passed.to_string(),
                ]
            })
            .collect();
        table(&["property", "instances", "worst", "threshold", "passed"], &rows)
    }
}
