//! JSON solve reports.

use serde::{Deserialize, Serialize};

use crate::config::SolverReport;
use crate::experiments::fmt_float;
use crate::solve::Solver;

/// Value rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    fmt_float(x).parse().unwrap_or(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisJson {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReportJson {
    pub solver: Solver,
    pub k: usize,
    pub l1_metric: f64,
    /// `|Xb|_2` for K = 1, `|XB|_*` otherwise.
    pub quad_or_nuclear_metric: f64,
    pub flips: usize,
    pub restarts: usize,
    pub restart_winner: usize,
    pub converged: bool,
    pub basis_completed: bool,
    pub basis: BasisJson,
    /// N rows of K signs.
    pub signs: Vec<Vec<i8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SolveReportJson {
    pub fn new(solver: Solver, restarts: usize, r: &SolverReport, timing: bool) -> Self {
        let (rows, cols) = r.basis.shape();
        let data = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| round12(r.basis[(i, j)]))
            .collect();
        SolveReportJson {
            solver,
            k: r.k(),
            l1_metric: round12(r.l1_metric),
            quad_or_nuclear_metric: round12(r.objective),
            flips: r.flips,
            restarts,
            restart_winner: r.restart_winner,
            converged: r.converged,
            basis_completed: r.basis_completed,
            basis: BasisJson { rows, cols, data },
            signs: r
                .signs
                .to_row_major()
                .chunks(r.signs.ncols())
                .map(<[i8]>::to_vec)
                .collect(),
            wall_time_s: timing.then(|| r.wall_time.as_secs_f64()),
        }
    }

    pub fn basis_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.basis.rows, self.basis.cols, &self.basis.data)
    }
}
