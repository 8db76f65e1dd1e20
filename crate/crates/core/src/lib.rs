//! Directed information on finite alphabets.
//!
//! The crate builds the joint law of an input/output pair from two causal
//! kernel families (the feedback input law and the channel), evaluates
//! directed information through two independent formulas, audits its
//! convexity, concavity and lower semicontinuity, and solves the two
//! extremum problems over a finite horizon: feedback capacity under a power
//! constraint and the non-anticipative rate distortion function.
//!
//! All quantities are in nats.

pub mod capacity;
pub mod config;
pub mod dirinfo;
pub mod error;
pub mod grid;
pub mod measures;
pub mod nrdf;
pub mod random;

pub use config::{KernelClass, SolverConfig};
pub use error::{Error, Result};
