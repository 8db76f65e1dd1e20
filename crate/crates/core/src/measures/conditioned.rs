//! Whole-path conditional measures.
//!
//! A forward kernel family induces `Q(y^n || x^n) = prod_i q_i(y_i | y^{i-1}, x^i)`,
//! one distribution over `Y_{0,n}` per input path. A backward family induces
//! `P(x^n || y^{n-1}) = prod_i p_i(x_i | x^{i-1}, y^{i-1})`, one distribution
//! over `X_{0,n}` per output path of length `n`. Convex combinations of
//! causal kernels are taken at this level: mixing per-step kernels does not
//! give the mixture of the induced measures.

use super::alphabet::AlphabetSpec;
use super::joint::{causal_product, ensure_same_spec, extract_backward_family, extract_forward_family, JointMeasure};
use super::kernel::{BackwardKernel, ForwardKernel};
use crate::error::{Error, Result};

/// Which variable the family conditions on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Given {
    /// Rows are input paths `x^n`, columns output paths `y^n` (forward side).
    InputPath,
    /// Rows are output paths `y^{n-1}`, columns input paths `x^n` (backward side).
    OutputPath,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionedFamily {
    spec: AlphabetSpec,
    given: Given,
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

impl ConditionedFamily {
    pub fn spec(&self) -> &AlphabetSpec {
        &self.spec
    }

    pub fn given(&self) -> Given {
        self.given
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, h: usize) -> &[f64] {
        &self.weights[h * self.cols..(h + 1) * self.cols]
    }

    /// Largest total-variation distance between corresponding rows.
    pub fn max_total_variation(&self, other: &ConditionedFamily) -> Result<f64> {
        self.ensure_compatible(other)?;
        Ok((0..self.rows)
            .map(|h| {
                0.5 * self
                    .row(h)
                    .iter()
                    .zip(other.row(h))
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max))
    }

    fn ensure_compatible(&self, other: &ConditionedFamily) -> Result<()> {
        ensure_same_spec(&self.spec, &other.spec)?;
        if self.given != other.given {
            return Err(Error::SpecMismatch("families condition on different sides".into()));
        }
        Ok(())
    }
}

/// `Q(. || x^n)` for every input path.
pub fn condition_forward(q: &ForwardKernel) -> ConditionedFamily {
    let spec = q.spec();
    let cells = causal_product(spec, None, Some(q));
    let (rows, cols) = (spec.x_paths(), spec.y_paths());
    let mut weights = vec![0.0; rows * cols];
    for (cell, w) in cells.into_iter().enumerate() {
        weights[spec.x_path(cell) * cols + spec.y_path(cell)] = w;
    }
    ConditionedFamily {
        spec: spec.clone(),
        given: Given::InputPath,
        rows,
        cols,
        weights,
    }
}

/// `P(. || y^{n-1})` for every output path of length `n`.
pub fn condition_backward(p: &BackwardKernel) -> ConditionedFamily {
    let spec = p.spec();
    let cells = causal_product(spec, Some(p), None);
    let (rows, cols) = (spec.y_paths_before_last(), spec.x_paths());
    let n = spec.horizon();
    let mut weights = vec![0.0; rows * cols];
    for (cell, w) in cells.into_iter().enumerate() {
        // the last output never enters P; every y_n repeats the same value
        if spec.digit(cell, 2 * n + 1) == 0 {
            weights[spec.y_prefix_path(cell, n) * cols + spec.x_path(cell)] = w;
        }
    }
    ConditionedFamily {
        spec: spec.clone(),
        given: Given::OutputPath,
        rows,
        cols,
        weights,
    }
}

/// Pointwise `lambda * a + (1 - lambda) * b`, row by row.
pub fn mix_conditioned(
    a: &ConditionedFamily,
    b: &ConditionedFamily,
    lambda: f64,
) -> Result<ConditionedFamily> {
    a.ensure_compatible(b)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("mixing weight {lambda} outside [0, 1]")));
    }
    let weights = a
        .weights
        .iter()
        .zip(&b.weights)
        .map(|(&x, &y)| lambda * x + (1.0 - lambda) * y)
        .collect();
    Ok(ConditionedFamily {
        weights,
        ..a.clone()
    })
}

/// Per-step forward kernels by successive conditioning of `c`.
///
/// Each input path is weighted uniformly, so a non-causal family is projected
/// by averaging over future inputs; for causal families the result is exact
/// wherever the conditioning prefix has positive mass and uniform elsewhere.
pub fn refactor_to_forward_kernel(c: &ConditionedFamily) -> Result<ForwardKernel> {
    if c.given != Given::InputPath {
        return Err(Error::SpecMismatch("expected a family conditioned on input paths".into()));
    }
    let spec = &c.spec;
    let u = 1.0 / spec.x_paths() as f64;
    let weights = (0..spec.cells())
        .map(|cell| u * c.row(spec.x_path(cell))[spec.y_path(cell)])
        .collect();
    Ok(extract_forward_family(&JointMeasure::from_weights_unchecked(
        spec.clone(),
        weights,
    )))
}

/// Per-step backward kernels by successive conditioning of `c`; mirror of
/// [`refactor_to_forward_kernel`].
pub fn refactor_to_backward_kernel(c: &ConditionedFamily) -> Result<BackwardKernel> {
    if c.given != Given::OutputPath {
        return Err(Error::SpecMismatch("expected a family conditioned on output paths".into()));
    }
    let spec = &c.spec;
    let u = 1.0 / spec.y_paths() as f64;
    let n = spec.horizon();
    let weights = (0..spec.cells())
        .map(|cell| u * c.row(spec.y_prefix_path(cell, n))[spec.x_path(cell)])
        .collect();
    Ok(extract_backward_family(&JointMeasure::from_weights_unchecked(
        spec.clone(),
        weights,
    )))
}
