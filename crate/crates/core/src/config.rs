use crate::error::{Error, Result};

/// Knobs shared by the capacity and rate distortion solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative objective change below which an inner solve is converged.
    pub tol: f64,
    /// Iteration budget of one inner solve.
    pub max_iters: usize,
    /// Target gap between the achieved constraint value and the budget.
    pub multiplier_tol: f64,
    /// Simplex grid resolution for the brute-force oracles.
    pub grid_resolution: usize,
    /// Seed for randomized audits.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 100_000,
            multiplier_tol: 1e-6,
            grid_resolution: 100,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if !(self.multiplier_tol > 0.0 && self.multiplier_tol.is_finite()) {
            return Err(Error::Domain(format!(
                "multiplier_tol must be positive, got {}",
                self.multiplier_tol
            )));
        }
        if self.grid_resolution == 0 {
            return Err(Error::Domain("grid_resolution must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which input kernels an optimization ranges over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelClass {
    /// `p_i(x_i | x^{i-1}, y^{i-1})`: inputs may react to past outputs.
    #[default]
    Feedback,
    /// `p_i(x_i | x^{i-1})`: rows tied across output histories.
    NoFeedback,
}
