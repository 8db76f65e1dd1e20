//! Finite alphabets over a horizon `0..=n` and the canonical dense-table layout.
//!
//! Every table in the crate shares one encoding: a cell of the joint space
//! `X_{0,n} x Y_{0,n}` is the mixed-radix number with digits
//! `(x_0, y_0, x_1, y_1, ..., x_n, y_n)`, earlier digits more significant.
//! A kernel history is then just a prefix of that number:
//!
//! * backward step `i` conditions on `(x^{i-1}, y^{i-1})`, the first `2i` digits;
//! * forward step `i` conditions on `(y^{i-1}, x^i)`, the first `2i + 1` digits.
//!
//! Path indices over `X_{0,n}` (or `Y_{0,n}`) alone use the same rule restricted
//! to the x (or y) digits.

use crate::error::{Error, Result};

/// Default upper bound on `|X_{0,n}| * |Y_{0,n}|`.
pub const DEFAULT_CELL_CAP: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphabetSpec {
    x_sizes: Vec<usize>,
    y_sizes: Vec<usize>,
    radices: Vec<usize>,
    // suffix[k] = product of radices[k..]; suffix[2n+2] = 1
    suffix: Vec<usize>,
}

impl AlphabetSpec {
    pub fn new(x_sizes: Vec<usize>, y_sizes: Vec<usize>) -> Result<Self> {
        Self::with_cell_cap(x_sizes, y_sizes, DEFAULT_CELL_CAP)
    }

    /// Same alphabet sizes at every time step.
    pub fn uniform(horizon: usize, x_size: usize, y_size: usize) -> Result<Self> {
        Self::new(vec![x_size; horizon + 1], vec![y_size; horizon + 1])
    }

    pub fn with_cell_cap(x_sizes: Vec<usize>, y_sizes: Vec<usize>, cap: usize) -> Result<Self> {
        if x_sizes.is_empty() {
            return Err(Error::InvalidAlphabet("horizon needs at least one time step".into()));
        }
        if x_sizes.len() != y_sizes.len() {
            return Err(Error::InvalidAlphabet(format!(
                "{} input alphabets but {} output alphabets",
                x_sizes.len(),
                y_sizes.len()
            )));
        }
        if let Some(i) = x_sizes.iter().chain(&y_sizes).position(|&s| s == 0) {
            return Err(Error::InvalidAlphabet(format!("alphabet {i} is empty")));
        }
        let cells: u128 = x_sizes.iter().chain(&y_sizes).map(|&s| s as u128).product();
        if cells > cap as u128 {
            return Err(Error::TooManyCells { cells, cap });
        }
        let radices: Vec<usize> = x_sizes
            .iter()
            .zip(&y_sizes)
            .flat_map(|(&x, &y)| [x, y])
            .collect();
        let mut suffix = vec![1usize; radices.len() + 1];
        for k in (0..radices.len()).rev() {
            suffix[k] = suffix[k + 1] * radices[k];
        }
        Ok(Self {
            x_sizes,
            y_sizes,
            radices,
            suffix,
        })
    }

    /// The last time index `n`.
    pub fn horizon(&self) -> usize {
        self.x_sizes.len() - 1
    }

    pub fn steps(&self) -> usize {
        self.x_sizes.len()
    }

    pub fn x_sizes(&self) -> &[usize] {
        &self.x_sizes
    }

    pub fn y_sizes(&self) -> &[usize] {
        &self.y_sizes
    }

    pub fn x_size(&self, i: usize) -> usize {
        self.x_sizes[i]
    }

    pub fn y_size(&self, i: usize) -> usize {
        self.y_sizes[i]
    }

    /// Number of cells of the joint space `X_{0,n} x Y_{0,n}`.
    pub fn cells(&self) -> usize {
        self.suffix[0]
    }

    /// Number of interleaved digits, `2(n + 1)`.
    pub fn digits(&self) -> usize {
        self.radices.len()
    }

    pub fn radix(&self, k: usize) -> usize {
        self.radices[k]
    }

    /// Number of distinct values of the first `k` interleaved digits.
    pub fn prefix_count(&self, k: usize) -> usize {
        self.suffix[0] / self.suffix[k]
    }

    /// Number of cells sharing a given `k`-digit prefix.
    pub fn block_len(&self, k: usize) -> usize {
        self.suffix[k]
    }

    /// Index of the first `k` digits of `cell`.
    #[inline]
    pub fn prefix(&self, cell: usize, k: usize) -> usize {
        cell / self.suffix[k]
    }

    /// The `k`-th interleaved digit of `cell`.
    #[inline]
    pub fn digit(&self, cell: usize, k: usize) -> usize {
        (cell / self.suffix[k + 1]) % self.radices[k]
    }

    /// `|X_{0,n}|`.
    pub fn x_paths(&self) -> usize {
        self.x_sizes.iter().product()
    }

    /// `|Y_{0,n}|`.
    pub fn y_paths(&self) -> usize {
        self.y_sizes.iter().product()
    }

    /// `|Y_{0,n-1}|`, which is 1 for `n = 0`.
    pub fn y_paths_before_last(&self) -> usize {
        self.y_sizes[..self.horizon()].iter().product()
    }

    /// Histories of backward step `i`: `|X_{0,i-1}| * |Y_{0,i-1}|`.
    pub fn backward_histories(&self, i: usize) -> usize {
        self.prefix_count(2 * i)
    }

    /// Histories of forward step `i`: `|Y_{0,i-1}| * |X_{0,i}|`.
    pub fn forward_histories(&self, i: usize) -> usize {
        self.prefix_count(2 * i + 1)
    }

    /// Index of `x^n` inside `X_{0,n}` for a joint cell.
    pub fn x_path(&self, cell: usize) -> usize {
        (0..self.steps()).fold(0, |acc, i| acc * self.x_sizes[i] + self.digit(cell, 2 * i))
    }

    /// Index of `y^n` inside `Y_{0,n}` for a joint cell.
    pub fn y_path(&self, cell: usize) -> usize {
        (0..self.steps()).fold(0, |acc, i| acc * self.y_sizes[i] + self.digit(cell, 2 * i + 1))
    }

    /// Index of `y^{i-1}` (the first `i` outputs) inside `Y_{0,i-1}`.
    pub fn y_prefix_path(&self, cell: usize, i: usize) -> usize {
        (0..i).fold(0, |acc, j| acc * self.y_sizes[j] + self.digit(cell, 2 * j + 1))
    }

    /// Joint cell for the given x and y path indices.
    pub fn cell_of_paths(&self, x_path: usize, y_path: usize) -> usize {
        let xs = decode_path(&self.x_sizes, x_path);
        let ys = decode_path(&self.y_sizes, y_path);
        xs.iter()
            .zip(&ys)
            .zip(self.x_sizes.iter().zip(&self.y_sizes))
            .fold(0, |acc, ((&x, &y), (&nx, &ny))| (acc * nx + x) * ny + y)
    }

    /// Splits a `k`-digit prefix index into its x digits and y digits.
    pub fn split_prefix(&self, k: usize, index: usize) -> (Vec<usize>, Vec<usize>) {
        let mut digits = vec![0; k];
        let mut rest = index;
        for j in (0..k).rev() {
            digits[j] = rest % self.radices[j];
            rest /= self.radices[j];
        }
        let xs = digits.iter().step_by(2).copied().collect();
        let ys = digits.iter().skip(1).step_by(2).copied().collect();
        (xs, ys)
    }

    /// Index, among output paths of the same length, of the y digits in a
    /// `k`-digit prefix.
    pub fn prefix_y_path(&self, k: usize, index: usize) -> usize {
        let (_, ys) = self.split_prefix(k, index);
        encode_path(&self.y_sizes[..ys.len()], &ys)
    }

    /// Index, among input paths of the same length, of the x digits in a
    /// `k`-digit prefix.
    pub fn prefix_x_path(&self, k: usize, index: usize) -> usize {
        let (xs, _) = self.split_prefix(k, index);
        encode_path(&self.x_sizes[..xs.len()], &xs)
    }
}

/// Mixed-radix digits of a path index, earlier digits more significant.
pub fn decode_path(sizes: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for j in (0..sizes.len()).rev() {
        out[j] = index % sizes[j];
        index /= sizes[j];
    }
    out
}

/// Inverse of [`decode_path`].
pub fn encode_path(sizes: &[usize], digits: &[usize]) -> usize {
    digits
        .iter()
        .zip(sizes)
        .fold(0, |acc, (&d, &s)| acc * s + d)
}

#[cfg(test)]
#[allow(clippy::identity_op)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(AlphabetSpec::new(vec![], vec![]).is_err());
        assert!(AlphabetSpec::new(vec![2], vec![2, 2]).is_err());
        assert!(AlphabetSpec::new(vec![2, 0], vec![2, 2]).is_err());
    }

    #[test]
    fn enforces_cell_cap() {
        let err = AlphabetSpec::with_cell_cap(vec![10, 10], vec![10, 10], 9_999).unwrap_err();
        assert_eq!(err, Error::TooManyCells { cells: 10_000, cap: 9_999 });
        assert!(AlphabetSpec::with_cell_cap(vec![10, 10], vec![10, 10], 10_000).is_ok());
    }

    #[test]
    fn interleaved_digits_and_paths() {
        let spec = AlphabetSpec::new(vec![2, 3], vec![3, 2]).unwrap();
        assert_eq!(spec.cells(), 36);
        // (x0, y0, x1, y1) = (1, 2, 0, 1)
        let cell = ((1 * 3 + 2) * 3 + 0) * 2 + 1;
        assert_eq!(spec.digit(cell, 0), 1);
        assert_eq!(spec.digit(cell, 1), 2);
        assert_eq!(spec.digit(cell, 2), 0);
        assert_eq!(spec.digit(cell, 3), 1);
        assert_eq!(spec.x_path(cell), 1 * 3 + 0);
        assert_eq!(spec.y_path(cell), 2 * 2 + 1);
        assert_eq!(spec.y_prefix_path(cell, 1), 2);
        assert_eq!(spec.cell_of_paths(3, 5), cell);
        assert_eq!(spec.prefix(cell, 2), 5);
        assert_eq!(spec.backward_histories(1), 6);
        assert_eq!(spec.forward_histories(1), 18);
        assert_eq!(spec.split_prefix(3, spec.prefix(cell, 3)), (vec![1, 0], vec![2]));
        assert_eq!(spec.y_paths_before_last(), 3);
    }

    #[test]
    fn path_codec_round_trips() {
        let sizes = [3, 1, 4, 2];
        for idx in 0..24 {
            assert_eq!(encode_path(&sizes, &decode_path(&sizes, idx)), idx);
        }
    }
}
