//! L1-norm principal component analysis by bit flipping, with exact
//! oracles, classical baselines and an experiment harness.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod rng;
pub mod signs;
pub mod solve;
pub mod solver_k1;
pub mod solver_kk;

/// Matrix types used throughout the public API.
pub use nalgebra;

pub use config::{Init, SolverConfig, SolverReport};
pub use error::{Error, Result};
pub use linalg::DataMatrix;
pub use solve::{solve, Solver};
