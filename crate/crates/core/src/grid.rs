//! Exhaustive search over products of simplex grids, and the flat per-cell
//! evaluator shared by the oracles and the solvers.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::AlphabetSpec;

/// Largest number of grid points an oracle will enumerate.
pub const GRID_POINT_CAP: u64 = 200_000_000;

/// Points of the simplex in `R^k` whose coordinates are multiples of `1/r`,
/// in lexicographic order of the numerators.
pub fn simplex_grid(r: usize, k: usize) -> Vec<Vec<f64>> {
    fn walk(r: usize, left: usize, slot: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.iter().map(|&c| c as f64 / r as f64).collect());
            return;
        }
        for c in 0..=left {
            cur[slot] = c;
            walk(r, left - c, slot + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        walk(r.max(1), r.max(1), 0, &mut vec![0; k], &mut out);
    }
    out
}

/// `C(r + k - 1, k - 1)` for each simplex, multiplied together.
pub fn grid_point_count(r: usize, widths: &[usize]) -> f64 {
    widths
        .iter()
        .map(|&k| (1..k).fold(1.0, |acc, j| acc * (r + j) as f64 / j as f64))
        .product()
}

/// The best grid point found: its objective and one row per simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct GridBest {
    pub value: f64,
    pub rows: Vec<Vec<f64>>,
}

/// Maximizes `eval` over the product of simplex grids. `eval` returns `None`
/// for infeasible points; ties go to the earliest point in enumeration order.
pub(crate) fn search_max<S, I, E>(r: usize, widths: &[usize], init: I, eval: E) -> Result<Option<GridBest>>
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    E: Fn(&mut S, &[&[f64]]) -> Option<f64> + Sync + Send,
{
    let points = grid_point_count(r, widths);
    if points > GRID_POINT_CAP as f64 {
        return Err(Error::GridTooLarge {
            points,
            cap: GRID_POINT_CAP,
        });
    }
    let mut by_width: Vec<Vec<Vec<f64>>> = Vec::new();
    let table: Vec<usize> = widths
        .iter()
        .map(|&w| {
            if by_width.len() <= w {
                by_width.resize(w + 1, Vec::new());
            }
            if by_width[w].is_empty() {
                by_width[w] = simplex_grid(r, w);
            }
            w
        })
        .collect();
    let grids: Vec<&Vec<Vec<f64>>> = table.iter().map(|&w| &by_width[w]).collect();
    let total = points.round() as u64;

    let best = (0..total)
        .into_par_iter()
        .map_init(
            || (init(), Vec::with_capacity(grids.len())),
            |(state, rows), index| {
                rows.clear();
                let mut rest = index;
                for g in grids.iter().rev() {
                    rows.push(g[(rest % g.len() as u64) as usize].as_slice());
                    rest /= g.len() as u64;
                }
                rows.reverse();
                eval(state, rows).map(|v| (v, index))
            },
        )
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
                (x, None) => x,
                (None, y) => y,
            },
        );

    Ok(best.map(|(value, index)| {
        let mut rest = index;
        let mut rows: Vec<Vec<f64>> = grids
            .iter()
            .rev()
            .map(|g| {
                let row = g[(rest % g.len() as u64) as usize].clone();
                rest /= g.len() as u64;
                row
            })
            .collect();
        rows.reverse();
        GridBest { value, rows }
    }))
}

/// Per-cell lookup tables: which kernel entry each cell passes through at
/// every step, and the output path of each cell.
///
/// Backward step `i` uses entry `prefix(cell, 2i + 1)` of its flat table and
/// forward step `i` entry `prefix(cell, 2i + 2)`.
#[derive(Clone, Debug)]
pub(crate) struct CellIndex {
    pub x_entry: Vec<Vec<usize>>,
    pub y_entry: Vec<Vec<usize>>,
    pub y_path: Vec<usize>,
    pub y_paths: usize,
}

impl CellIndex {
    pub fn new(spec: &AlphabetSpec) -> Self {
        let cells = spec.cells();
        let x_entry = (0..spec.steps())
            .map(|i| (0..cells).map(|c| spec.prefix(c, 2 * i + 1)).collect())
            .collect();
        let y_entry = (0..spec.steps())
            .map(|i| (0..cells).map(|c| spec.prefix(c, 2 * i + 2)).collect())
            .collect();
        Self {
            x_entry,
            y_entry,
            y_path: (0..cells).map(|c| spec.y_path(c)).collect(),
            y_paths: spec.y_paths(),
        }
    }

    pub fn cells(&self) -> usize {
        self.y_path.len()
    }

    /// Product over steps of the entries a cell passes through.
    pub fn path_product(entries: &[Vec<usize>], steps: &[Vec<f64>], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 1.0);
        for (idx, table) in entries.iter().zip(steps) {
            for (v, &e) in out.iter_mut().zip(idx) {
                *v *= table[e];
            }
        }
    }

    pub fn backward_paths(&self, steps: &[Vec<f64>], out: &mut [f64]) {
        Self::path_product(&self.x_entry, steps, out);
    }

    pub fn forward_paths(&self, steps: &[Vec<f64>], out: &mut [f64]) {
        Self::path_product(&self.y_entry, steps, out);
    }

    /// Directed information `E ln(Q(y||x) / nu(y))` of the joint `pp * qp`,
    /// and the expectation of `weights` under it (`+inf` if an infinite
    /// weight carries mass).
    pub fn evaluate(&self, pp: &[f64], qp: &[f64], weights: Option<&[f64]>, nu: &mut Vec<f64>) -> (f64, f64) {
        nu.clear();
        nu.resize(self.y_paths, 0.0);
        for c in 0..self.cells() {
            nu[self.y_path[c]] += pp[c] * qp[c];
        }
        let mut di = 0.0;
        let mut expectation = 0.0;
        for c in 0..self.cells() {
            let j = pp[c] * qp[c];
            if j > 0.0 {
                di += j * (qp[c] / nu[self.y_path[c]]).ln();
                if let Some(w) = weights {
                    expectation += j * w[c];
                }
            }
        }
        (di.max(0.0), expectation)
    }
}
