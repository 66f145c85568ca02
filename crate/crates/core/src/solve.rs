//! Uniform entry point over all solvers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{alt_opt_solve, exhaustive_oracle, fixed_point_solve};
use crate::config::{Init, RunTrace, SolverConfig, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;
use crate::solver_k1::bit_flip_solve;
use crate::solver_kk::bit_flip_solve_k;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    L1bf,
    Fp,
    Ao,
    Oracle,
}

impl Solver {
    pub const ALL: [Solver; 4] = [Solver::L1bf, Solver::Fp, Solver::Ao, Solver::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Solver::L1bf => "l1bf",
            Solver::Fp => "fp",
            Solver::Ao => "ao",
            Solver::Oracle => "oracle",
        }
    }

    /// Initialization used when the caller does not pick one. The
    /// fixed-point baseline starts from an equiprobable random sign vector.
    pub fn default_init(self) -> Init {
        match self {
            Solver::Fp => Init::Random,
            _ => Init::SvSign,
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown solver '{s}' (expected l1bf, fp, ao or oracle)")))
    }
}

pub fn solve(x: &DataMatrix, k: usize, solver: Solver, cfg: &SolverConfig) -> Result<SolverReport> {
    match solver {
        Solver::L1bf if k == 1 => bit_flip_solve(x, cfg),
        Solver::L1bf => bit_flip_solve_k(x, k, cfg),
        Solver::Fp => fixed_point_solve(x, k, cfg),
        Solver::Ao => alt_opt_solve(x, k, cfg),
        Solver::Oracle => {
            let started = Instant::now();
            let r = exhaustive_oracle(x, k)?;
            Ok(SolverReport {
                runs: vec![RunTrace {
                    flips: 0,
                    trajectory: vec![r.best_value],
                    converged: true,
                    l1_metric: r.l1_metric,
                }],
                basis: r.basis,
                signs: r.best,
                l1_metric: r.l1_metric,
                objective: r.best_value,
                flips: 0,
                converged: true,
                restart_winner: 0,
                basis_completed: r.basis_completed,
                wall_time: started.elapsed(),
            })
        }
    }
}
