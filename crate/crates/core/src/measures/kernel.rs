//! Causal kernel families.
//!
//! A [`BackwardKernel`] holds `p_i(x_i | x^{i-1}, y^{i-1})` for `i = 0..=n`,
//! the feedback input law. A [`ForwardKernel`] holds
//! `q_i(y_i | y^{i-1}, x^i)`, the channel (or reconstruction) law. Step `i`
//! is stored as a dense row-major table, one row per history, with the
//! history index given by the interleaved prefix encoding of
//! [`AlphabetSpec`].

use super::alphabet::AlphabetSpec;
use super::pmf::{check_probability_row, PMF_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Backward,
    Forward,
}

impl Direction {
    fn prefix_len(self, i: usize) -> usize {
        match self {
            Direction::Backward => 2 * i,
            Direction::Forward => 2 * i + 1,
        }
    }

    fn width(self, spec: &AlphabetSpec, i: usize) -> usize {
        match self {
            Direction::Backward => spec.x_size(i),
            Direction::Forward => spec.y_size(i),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Direction::Backward => "backward",
            Direction::Forward => "forward",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Tables {
    spec: AlphabetSpec,
    steps: Vec<Vec<f64>>,
}

impl Tables {
    fn new(spec: AlphabetSpec, steps: Vec<Vec<f64>>, dir: Direction, tol: f64) -> Result<Self> {
        if steps.len() != spec.steps() {
            return Err(Error::SpecMismatch(format!(
                "{} kernel has {} steps, alphabet has {}",
                dir.name(),
                steps.len(),
                spec.steps()
            )));
        }
        for (i, table) in steps.iter().enumerate() {
            let rows = spec.prefix_count(dir.prefix_len(i));
            let width = dir.width(&spec, i);
            if table.len() != rows * width {
                return Err(Error::SpecMismatch(format!(
                    "{} step {i}: expected {rows} rows of {width}, got {} entries",
                    dir.name(),
                    table.len()
                )));
            }
            for (h, row) in table.chunks(width).enumerate() {
                check_probability_row(row, tol).map_err(|e| {
                    Error::InvalidPmf(format!("{} step {i} history {h}: {e}", dir.name()))
                })?;
            }
        }
        Ok(Self { spec, steps })
    }

    fn from_fn<F>(spec: AlphabetSpec, dir: Direction, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[usize], &[usize]) -> Vec<f64>,
    {
        let steps = (0..spec.steps())
            .map(|i| {
                let k = dir.prefix_len(i);
                let mut table = Vec::with_capacity(spec.prefix_count(k) * dir.width(&spec, i));
                for h in 0..spec.prefix_count(k) {
                    let (xs, ys) = spec.split_prefix(k, h);
                    table.extend(f(i, &xs, &ys));
                }
                table
            })
            .collect();
        Self::new(spec, steps, dir, PMF_TOLERANCE)
    }

    fn uniform(spec: AlphabetSpec, dir: Direction) -> Self {
        let steps = (0..spec.steps())
            .map(|i| {
                let w = dir.width(&spec, i);
                vec![1.0 / w as f64; spec.prefix_count(dir.prefix_len(i)) * w]
            })
            .collect();
        Self { spec, steps }
    }
}

macro_rules! kernel_accessors {
    ($ty:ident, $dir:expr) => {
        impl $ty {
            /// Validated construction from row-major step tables.
            pub fn new(spec: AlphabetSpec, steps: Vec<Vec<f64>>) -> Result<Self> {
                Tables::new(spec, steps, $dir, PMF_TOLERANCE).map(|t| Self { tables: t })
            }

            /// Every row uniform.
            pub fn uniform(spec: &AlphabetSpec) -> Self {
                Self {
                    tables: Tables::uniform(spec.clone(), $dir),
                }
            }

            pub(crate) fn from_steps_unchecked(spec: AlphabetSpec, steps: Vec<Vec<f64>>) -> Self {
                debug_assert!(Tables::new(spec.clone(), steps.clone(), $dir, 1e-9).is_ok());
                Self {
                    tables: Tables { spec, steps },
                }
            }

            pub fn spec(&self) -> &AlphabetSpec {
                &self.tables.spec
            }

            /// Row-major table of step `i`.
            pub fn step(&self, i: usize) -> &[f64] {
                &self.tables.steps[i]
            }

            pub fn steps(&self) -> &[Vec<f64>] {
                &self.tables.steps
            }

            pub fn into_steps(self) -> Vec<Vec<f64>> {
                self.tables.steps
            }

            /// Number of histories conditioning step `i`.
            pub fn histories(&self, i: usize) -> usize {
                self.tables.spec.prefix_count($dir.prefix_len(i))
            }

            /// Alphabet size of the variable drawn at step `i`.
            pub fn width(&self, i: usize) -> usize {
                $dir.width(&self.tables.spec, i)
            }

            /// Length of the interleaved prefix that indexes histories of step `i`.
            pub fn history_digits(&self, i: usize) -> usize {
                $dir.prefix_len(i)
            }

            pub fn row(&self, i: usize, history: usize) -> &[f64] {
                let w = self.width(i);
                &self.tables.steps[i][history * w..(history + 1) * w]
            }
        }
    };
}

/// The feedback input law `{p_i(. | x^{i-1}, y^{i-1})}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BackwardKernel {
    tables: Tables,
}

kernel_accessors!(BackwardKernel, Direction::Backward);

impl BackwardKernel {
    /// Builds each row from `f(i, x^{i-1}, y^{i-1})`.
    pub fn from_fn<F>(spec: &AlphabetSpec, f: F) -> Result<Self>
    where
        F: FnMut(usize, &[usize], &[usize]) -> Vec<f64>,
    {
        Tables::from_fn(spec.clone(), Direction::Backward, f).map(|t| Self { tables: t })
    }

    /// A kernel with no feedback: row `i` depends on `x^{i-1}` only.
    pub fn without_feedback<F>(spec: &AlphabetSpec, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[usize]) -> Vec<f64>,
    {
        Self::from_fn(spec, |i, xs, _| f(i, xs))
    }

    /// `p_i(x_i | x^{i-1}, y^{i-1})`.
    pub fn prob(&self, i: usize, xs: &[usize], ys: &[usize], x: usize) -> f64 {
        self.row(i, self.history_index(xs, ys))[x]
    }

    fn history_index(&self, xs: &[usize], ys: &[usize]) -> usize {
        let spec = self.spec();
        debug_assert_eq!(xs.len(), ys.len());
        xs.iter()
            .zip(ys)
            .enumerate()
            .fold(0, |acc, (j, (&x, &y))| (acc * spec.x_size(j) + x) * spec.y_size(j) + y)
    }

    /// True when every row ignores the output history up to `tol`.
    pub fn is_feedback_free(&self, tol: f64) -> bool {
        let spec = self.spec();
        (0..spec.steps()).all(|i| {
            let w = self.width(i);
            // histories are (x_0, y_0, ..., x_{i-1}, y_{i-1}); compare each row
            // with the row that has the same x digits and all-zero y digits
            (0..self.histories(i)).all(|h| {
                let (xs, _) = spec.split_prefix(2 * i, h);
                let base = self.history_index(&xs, &vec![0; i]);
                self.step(i)[h * w..(h + 1) * w]
                    .iter()
                    .zip(&self.step(i)[base * w..(base + 1) * w])
                    .all(|(a, b)| (a - b).abs() <= tol)
            })
        })
    }
}

/// The channel law `{q_i(. | y^{i-1}, x^i)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardKernel {
    tables: Tables,
}

kernel_accessors!(ForwardKernel, Direction::Forward);

impl ForwardKernel {
    /// Builds each row from `f(i, x^i, y^{i-1})`.
    pub fn from_fn<F>(spec: &AlphabetSpec, f: F) -> Result<Self>
    where
        F: FnMut(usize, &[usize], &[usize]) -> Vec<f64>,
    {
        Tables::from_fn(spec.clone(), Direction::Forward, f).map(|t| Self { tables: t })
    }

    /// A memoryless channel: row `i` depends on the current input `x_i` only.
    pub fn memoryless<F>(spec: &AlphabetSpec, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Vec<f64>,
    {
        Self::from_fn(spec, |i, xs, _| f(i, xs[i]))
    }

    /// `q_i(y_i | y^{i-1}, x^i)`.
    pub fn prob(&self, i: usize, xs: &[usize], ys: &[usize], y: usize) -> f64 {
        let spec = self.spec();
        debug_assert_eq!(xs.len(), ys.len() + 1);
        let mut h = 0;
        for j in 0..i {
            h = (h * spec.x_size(j) + xs[j]) * spec.y_size(j) + ys[j];
        }
        h = h * spec.x_size(i) + xs[i];
        self.row(i, h)[y]
    }

    /// True when no row depends on the input history.
    pub fn ignores_input(&self, tol: f64) -> bool {
        let spec = self.spec();
        (0..spec.steps()).all(|i| {
            (0..self.histories(i)).all(|h| {
                let (_, ys) = spec.split_prefix(2 * i + 1, h);
                let base = ys
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (j, &y)| acc * spec.x_size(j) * spec.y_size(j) + y)
                    * spec.x_size(i);
                self.row(i, h)
                    .iter()
                    .zip(self.row(i, base))
                    .all(|(a, b)| (a - b).abs() <= tol)
            })
        })
    }
}

/// Binary symmetric channel row for input `x` with crossover `eps`.
pub fn bsc_row(x: usize, eps: f64) -> Vec<f64> {
    if x == 0 {
        vec![1.0 - eps, eps]
    } else {
        vec![eps, 1.0 - eps]
    }
}
