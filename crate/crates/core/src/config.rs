use std::time::Duration;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signs::{SignMatrix, SignVector};

/// Starting point of the first run; later restarts always draw fresh
/// Gaussian starts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Sign of the leading scaled right singular vector.
    #[default]
    SvSign,
    /// Equiprobable point of {-1, +1}^N drawn from the run seed.
    Random,
    /// Caller-supplied start, replicated across columns when K > 1.
    Given(SignVector),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub init: Init,
    /// Number of starts `L` (>= 1).
    pub restarts: usize,
    /// Maximum number of executed flips per start; `None` means N (K = 1) or
    /// NK (K > 1).
    pub flip_budget: Option<usize>,
    /// Absolute strict-improvement threshold; `None` selects the
    /// scale-aware default of each solver.
    pub tol: Option<f64>,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            init: Init::SvSign,
            restarts: 1,
            flip_budget: None,
            tol: None,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Precondition("restarts must be >= 1".into()));
        }
        if self.flip_budget == Some(0) {
            return Err(Error::Precondition("flip budget must be >= 1".into()));
        }
        if let Some(tol) = self.tol {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::Precondition(format!(
                    "tolerance must be finite and >= 0, got {tol}"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one start of an iterative solver.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub flips: usize,
    /// Search objective after initialization and after each flip
    /// (`|Yb|^2` for K = 1, `|YB|_*` for K > 1); for the baselines, the
    /// metric after each iteration.
    pub trajectory: Vec<f64>,
    pub converged: bool,
    pub l1_metric: f64,
}

#[derive(Clone, Debug)]
pub struct SolverReport {
    /// Orthonormal `D x K` basis.
    pub basis: DMatrix<f64>,
    pub signs: SignMatrix,
    /// `|X^T Q|_1`.
    pub l1_metric: f64,
    /// `|Xb|_2` for K = 1, `|XB|_*` for K > 1.
    pub objective: f64,
    /// Flips (or iterations, for the baselines) of the winning start.
    pub flips: usize,
    pub converged: bool,
    pub restart_winner: usize,
    /// Whether the Procrustes step had to complete missing directions.
    pub basis_completed: bool,
    pub runs: Vec<RunTrace>,
    pub wall_time: Duration,
}

impl SolverReport {
    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    /// Single component for K = 1 reports.
    pub fn q(&self) -> nalgebra::DVector<f64> {
        self.basis.column(0).into_owned()
    }

    pub fn b(&self) -> SignVector {
        self.signs.column(0)
    }

    pub fn trajectory(&self) -> &[f64] {
        &self.runs[self.restart_winner].trajectory
    }
}

/// Index of the best metric, lowest index on ties.
pub(crate) fn pick_winner(metrics: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, m) in metrics.into_iter().enumerate() {
        if m > best.1 {
            best = (i, m);
        }
    }
    best.0
}
