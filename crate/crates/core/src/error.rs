use thiserror::Error;

/// Errors produced by the measure algebra and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("dense table of {cells} cells exceeds the cap of {cap}")]
    TooManyCells { cells: u128, cap: usize },

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("shape mismatch: {0}")]
    SpecMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sequence does not converge: final total variation {final_tv:e} (needs < {threshold:e})")]
    NonConvergentSequence { final_tv: f64, threshold: f64 },

    #[error("constraint is infeasible: minimum achievable {minimum} exceeds budget {budget}")]
    InfeasibleConstraint { minimum: f64, budget: f64 },

    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: f64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
