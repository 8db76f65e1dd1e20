//! Problem files: JSON documents with explicit shapes and row-major tables.

use std::path::Path;

use dirinfo_core::capacity::PowerConstraint;
use dirinfo_core::measures::{AlphabetSpec, BackwardKernel, ForwardKernel, DEFAULT_CELL_CAP};
use dirinfo_core::nrdf::{DistortionConstraint, SourceSpec};
use dirinfo_core::{KernelClass, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT_VERSION: &str = "1";

/// Rows may be off by this much on load; they are renormalized afterwards.
pub const LOAD_TOLERANCE: f64 = 1e-9;

pub const CELL_CAP_VAR: &str = "DIRINFO_CELL_CAP";

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format_version: String,
    pub spec: SpecBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<KernelsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_class: Option<ClassName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecBlock {
    pub x_sizes: Vec<usize>,
    pub y_sizes: Vec<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backward: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forward: Option<Vec<Vec<f64>>>,
}

/// A source is a backward kernel that ignores past reconstructions.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceBlock {
    pub steps: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Power,
    Distortion,
}

/// `null` table entries stand for an infinite cost.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintBlock {
    pub kind: ConstraintKind,
    pub table: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassName {
    Feedback,
    NoFeedback,
}

impl From<ClassName> for KernelClass {
    fn from(c: ClassName) -> Self {
        match c {
            ClassName::Feedback => KernelClass::Feedback,
            ClassName::NoFeedback => KernelClass::NoFeedback,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub multiplier_tol: Option<f64>,
    pub grid_resolution: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub units: Option<Units>,
    pub format: Option<Format>,
}

impl ProblemFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported format_version {:?}, expected {FORMAT_VERSION:?}",
                file.format_version
            )));
        }
        Ok(file)
    }

    pub fn alphabet(&self) -> Result<AlphabetSpec, CliError> {
        let cap = cell_cap()?;
        Ok(AlphabetSpec::with_cell_cap(
            self.spec.x_sizes.clone(),
            self.spec.y_sizes.clone(),
            cap,
        )?)
    }

    pub fn backward(&self, spec: &AlphabetSpec) -> Result<BackwardKernel, CliError> {
        let tables = self
            .kernels
            .as_ref()
            .and_then(|k| k.backward.clone())
            .ok_or_else(|| CliError::Parse("missing kernels.backward".into()))?;
        let widths = spec.x_sizes().to_vec();
        Ok(BackwardKernel::new(spec.clone(), renormalize("kernels.backward", tables, &widths)?)?)
    }

    pub fn forward(&self, spec: &AlphabetSpec) -> Result<ForwardKernel, CliError> {
        let tables = self
            .kernels
            .as_ref()
            .and_then(|k| k.forward.clone())
            .ok_or_else(|| CliError::Parse("missing kernels.forward".into()))?;
        let widths = spec.y_sizes().to_vec();
        Ok(ForwardKernel::new(spec.clone(), renormalize("kernels.forward", tables, &widths)?)?)
    }

    pub fn source(&self, spec: &AlphabetSpec) -> Result<SourceSpec, CliError> {
        let block = self.source.as_ref().ok_or_else(|| CliError::Parse("missing source".into()))?;
        let steps = renormalize("source.steps", block.steps.clone(), spec.x_sizes())?;
        Ok(SourceSpec::new(BackwardKernel::new(spec.clone(), steps)?)?)
    }

    fn constraint_of(&self, kind: ConstraintKind) -> Result<Option<&ConstraintBlock>, CliError> {
        match &self.constraint {
            None => Ok(None),
            Some(c) if c.kind == kind => Ok(Some(c)),
            Some(c) => Err(CliError::Parse(format!("constraint kind {:?} does not fit this command", c.kind))),
        }
    }

    pub fn power(&self, spec: &AlphabetSpec) -> Result<Option<PowerConstraint>, CliError> {
        let Some(block) = self.constraint_of(ConstraintKind::Power)? else {
            return Ok(None);
        };
        if block.budgets.is_some() {
            return Err(CliError::Parse("budget grids are only supported for distortion".into()));
        }
        let budget = block.budget.ok_or_else(|| CliError::Parse("missing constraint.budget".into()))?;
        Ok(Some(PowerConstraint::new(spec.clone(), block.costs(), budget)?))
    }

    /// The distortion table and either one budget or an ascending budget grid.
    pub fn distortion(&self, spec: &AlphabetSpec) -> Result<(DistortionConstraint, Budgets), CliError> {
        let block = self
            .constraint_of(ConstraintKind::Distortion)?
            .ok_or_else(|| CliError::Parse("missing distortion constraint".into()))?;
        let budgets = match (block.budget, &block.budgets) {
            (Some(b), None) => Budgets::Single(b),
            (None, Some(grid)) if !grid.is_empty() => Budgets::Curve(grid.clone()),
            _ => {
                return Err(CliError::Parse(
                    "distortion constraint needs exactly one of budget or a nonempty budgets list".into(),
                ))
            }
        };
        let first = match &budgets {
            Budgets::Single(b) => *b,
            Budgets::Curve(grid) => grid[0],
        };
        Ok((DistortionConstraint::new(spec.clone(), block.costs(), first)?, budgets))
    }

    pub fn class(&self) -> KernelClass {
        self.kernel_class.map(Into::into).unwrap_or_default()
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(s) = &self.solver {
            cfg.tol = s.tol.unwrap_or(cfg.tol);
            cfg.max_iters = s.max_iters.unwrap_or(cfg.max_iters);
            cfg.multiplier_tol = s.multiplier_tol.unwrap_or(cfg.multiplier_tol);
            cfg.grid_resolution = s.grid_resolution.unwrap_or(cfg.grid_resolution);
            cfg.seed = s.seed.unwrap_or(cfg.seed);
        }
        cfg
    }

    pub fn units(&self) -> Units {
        self.output.as_ref().and_then(|o| o.units).unwrap_or_default()
    }

    pub fn format(&self) -> Format {
        self.output.as_ref().and_then(|o| o.format).unwrap_or_default()
    }
}

pub enum Budgets {
    Single(f64),
    Curve(Vec<f64>),
}

impl ConstraintBlock {
    fn costs(&self) -> Vec<f64> {
        self.table.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect()
    }
}

/// Checks every row against [`LOAD_TOLERANCE`] and rescales it to sum to one.
fn renormalize(field: &str, mut tables: Vec<Vec<f64>>, widths: &[usize]) -> Result<Vec<Vec<f64>>, CliError> {
    if tables.len() != widths.len() {
        return Err(CliError::Parse(format!(
            "{field}: expected {} step tables, found {}",
            widths.len(),
            tables.len()
        )));
    }
    for (i, (table, &w)) in tables.iter_mut().zip(widths).enumerate() {
        if table.len() % w != 0 {
            return Err(CliError::Parse(format!(
                "{field}[{i}]: length {} is not a multiple of the row width {w}",
                table.len()
            )));
        }
        for (r, row) in table.chunks_mut(w).enumerate() {
            if let Some(bad) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(CliError::Parse(format!("{field}[{i}] row {r}: entry {bad} is not a probability")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > LOAD_TOLERANCE {
                return Err(CliError::Parse(format!("{field}[{i}] row {r}: sums to {total}")));
            }
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
    Ok(tables)
}

fn cell_cap() -> Result<usize, CliError> {
    match std::env::var(CELL_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("{CELL_CAP_VAR}={v:?} is not a cell count"))),
        Err(_) => Ok(DEFAULT_CELL_CAP),
    }
}

/// A problem file carrying a pair of kernels, as emitted for replay.
pub fn kernel_file(backward: &BackwardKernel, forward: &ForwardKernel) -> ProblemFile {
    let spec = backward.spec();
    ProblemFile {
        format_version: FORMAT_VERSION.into(),
        spec: SpecBlock {
            x_sizes: spec.x_sizes().to_vec(),
            y_sizes: spec.y_sizes().to_vec(),
        },
        kernels: Some(KernelsBlock {
            backward: Some(backward.steps().to_vec()),
            forward: Some(forward.steps().to_vec()),
        }),
        ..Default::default()
    }
}
