use crate::error::{Error, Result};

/// Tolerance on the total mass of a validated probability vector.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// A probability vector on a finite index set.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    weights: Vec<f64>,
}

impl Pmf {
    /// Validates `weights`: finite, nonnegative and summing to one within
    /// [`PMF_TOLERANCE`]. Out-of-tolerance input is rejected, never renormalized.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_probability_row(&weights, PMF_TOLERANCE)?;
        Ok(Self { weights })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidPmf("empty support".into()));
        }
        Ok(Self {
            weights: vec![1.0 / len as f64; len],
        })
    }

    pub fn point_mass(len: usize, at: usize) -> Result<Self> {
        if at >= len {
            return Err(Error::InvalidPmf(format!("atom {at} outside support of size {len}")));
        }
        let mut weights = vec![0.0; len];
        weights[at] = 1.0;
        Ok(Self { weights })
    }

    /// Wraps weights produced by an internal summation; only debug builds check them.
    pub(crate) fn from_sums(weights: Vec<f64>) -> Self {
        debug_assert!(check_probability_row(&weights, 1e-9).is_ok());
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }

    /// Total variation distance, `sup_A |a(A) - b(A)|`.
    pub fn total_variation(&self, other: &Pmf) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::SpecMismatch(format!(
                "pmfs of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(total_variation(&self.weights, &other.weights))
    }
}

impl std::ops::Index<usize> for Pmf {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

pub(crate) fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub(crate) fn check_probability_row(row: &[f64], tol: f64) -> Result<()> {
    if row.is_empty() {
        return Err(Error::InvalidPmf("empty support".into()));
    }
    let mut sum = 0.0;
    for (i, &w) in row.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidPmf(format!("weight {i} is {w}")));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidPmf(format!("weights sum to {sum:.17}")));
    }
    Ok(())
}
