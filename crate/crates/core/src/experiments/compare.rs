//! Degradation of each solver against the exhaustive oracle over a batch of
//! random instances.

use std::path::{Path, PathBuf};
use std::time::Duration;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{degradation, empirical_cdf, ensure_dir, fmt_float, gaussian_instance, Csv, EXACT_TOL};
use crate::baselines::exhaustive_oracle;
use crate::config::SolverConfig;
use crate::error::Result;
use crate::linalg::DataMatrix;
use crate::rng::{derive_seed, rng_for, stream};
use crate::solve::{solve, Solver};

/// Replace the first `count` samples by Gaussian draws scaled by `scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierSpec {
    pub count: usize,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialBatch {
    /// Ambient dimension D.
    pub dim: usize,
    /// Number of samples N.
    pub samples: usize,
    /// Rank d of the generated data; `None` means full rank.
    pub rank: Option<usize>,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    /// Starts per solver run (L).
    pub restarts: usize,
    pub solvers: Vec<Solver>,
    pub outliers: Option<OutlierSpec>,
}

impl Default for TrialBatch {
    fn default() -> Self {
        TrialBatch {
            dim: 4,
            samples: 16,
            rank: None,
            k: 1,
            trials: 1000,
            seed: 0,
            restarts: 1,
            solvers: vec![Solver::L1bf, Solver::Fp, Solver::Ao],
            outliers: None,
        }
    }
}

impl TrialBatch {
    pub fn instance(&self, trial: usize) -> Result<DataMatrix> {
        let rank = self.rank.unwrap_or(self.dim);
        let mut x = gaussian_instance(self.dim, self.samples, rank, self.seed, trial as u64);
        if let Some(o) = &self.outliers {
            let mut rng = rng_for(self.seed, &[stream::TRIAL, trial as u64, 1]);
            for c in 0..o.count.min(self.samples) {
                for r in 0..self.dim {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x[(r, c)] = o.scale * z;
                }
            }
        }
        DataMatrix::new(x)
    }

    pub fn solver_config(&self, solver: Solver, trial: usize) -> SolverConfig {
        SolverConfig::default()
            .with_init(solver.default_init())
            .with_restarts(self.restarts)
            .with_seed(derive_seed(self.seed, &[stream::TRIAL, trial as u64]))
    }
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub l1_metric: f64,
    pub delta: f64,
    pub flips: usize,
    pub converged: bool,
    /// Largest flip (iteration) count over all starts.
    pub max_run_flips: usize,
    /// Every start's objective trajectory is strictly increasing.
    pub strictly_increasing: bool,
    pub wall_time: Duration,
}

#[derive(Clone, Debug)]
pub struct SolverOutcomes {
    pub solver: Solver,
    pub trials: Vec<TrialOutcome>,
}

impl SolverOutcomes {
    pub fn deltas(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.delta).collect()
    }

    pub fn exact_rate(&self) -> f64 {
        let hits = self.trials.iter().filter(|t| t.delta <= EXACT_TOL).count();
        hits as f64 / self.trials.len() as f64
    }

    pub fn max_delta(&self) -> f64 {
        self.trials.iter().map(|t| t.delta).fold(0.0, f64::max)
    }

    pub fn mean_delta(&self) -> f64 {
        mean(self.trials.iter().map(|t| t.delta))
    }

    pub fn mean_flips(&self) -> f64 {
        mean(self.trials.iter().map(|t| t.flips as f64))
    }

    pub fn converged_rate(&self) -> f64 {
        mean(self.trials.iter().map(|t| if t.converged { 1.0 } else { 0.0 }))
    }

    pub fn mean_wall_time(&self) -> f64 {
        mean(self.trials.iter().map(|t| t.wall_time.as_secs_f64()))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonResult {
    pub batch: TrialBatch,
    pub oracle_metrics: Vec<f64>,
    pub solvers: Vec<SolverOutcomes>,
}

impl ComparisonResult {
    pub fn outcomes(&self, solver: Solver) -> Option<&SolverOutcomes> {
        self.solvers.iter().find(|s| s.solver == solver)
    }

    /// Writes `cdf_<solver>.csv` per solver and `summary.csv`. Wall times
    /// are included only when `timing` is set, so that default artifacts
    /// are reproducible byte for byte.
    pub fn write(&self, dir: &Path, timing: bool) -> Result<Vec<PathBuf>> {
        ensure_dir(dir)?;
        let mut paths = Vec::new();
        for s in &self.solvers {
            let mut csv = Csv::new(&["delta", "cum_prob"]);
            for (d, p) in empirical_cdf(&s.deltas()) {
                csv.row(&[fmt_float(d), fmt_float(p)]);
            }
            paths.push(csv.write(dir, &format!("cdf_{}.csv", s.solver))?);
        }
        let mut header = vec!["solver", "exact_rate", "mean_delta", "max_delta", "mean_flips", "converged_rate"];
        if timing {
            header.push("mean_wall_time_s");
        }
        let mut csv = Csv::new(&header);
        for s in &self.solvers {
            let mut row = vec![
                s.solver.to_string(),
                fmt_float(s.exact_rate()),
                fmt_float(s.mean_delta()),
                fmt_float(s.max_delta()),
                fmt_float(s.mean_flips()),
                fmt_float(s.converged_rate()),
            ];
            if timing {
                row.push(fmt_float(s.mean_wall_time()));
            }
            csv.row(&row);
        }
        let mut sdp = vec!["sdp".to_string()];
        sdp.extend(std::iter::repeat_n("not implemented".to_string(), header.len() - 1));
        csv.row(&sdp);
        paths.push(csv.write(dir, "summary.csv")?);
        Ok(paths)
    }
}

/// Runs every solver of the batch on every trial and measures its
/// degradation against the exhaustive oracle. Trials run in parallel; the
/// result is ordered by trial index.
pub fn run_comparison(batch: &TrialBatch) -> Result<ComparisonResult> {
    let per_trial: Vec<(f64, Vec<TrialOutcome>)> = (0..batch.trials)
        .into_par_iter()
        .map(|t| {
            let x = batch.instance(t)?;
            let oracle = exhaustive_oracle(&x, batch.k)?;
            let outcomes = batch
                .solvers
                .iter()
                .map(|&solver| {
                    let r = solve(&x, batch.k, solver, &batch.solver_config(solver, t))?;
                    Ok(TrialOutcome {
                        l1_metric: r.l1_metric,
                        delta: degradation(r.l1_metric, oracle.l1_metric)?,
                        flips: r.flips,
                        converged: r.converged,
                        max_run_flips: r.runs.iter().map(|run| run.flips).max().unwrap_or(0),
                        strictly_increasing: r
                            .runs
                            .iter()
                            .all(|run| run.trajectory.windows(2).all(|w| w[1] > w[0])),
                        wall_time: r.wall_time,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((oracle.l1_metric, outcomes))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut solvers: Vec<SolverOutcomes> = batch
        .solvers
        .iter()
        .map(|&solver| SolverOutcomes {
            solver,
            trials: Vec::with_capacity(batch.trials),
        })
        .collect();
    let mut oracle_metrics = Vec::with_capacity(batch.trials);
    for (metric, outcomes) in per_trial {
        oracle_metrics.push(metric);
        for (slot, o) in solvers.iter_mut().zip(outcomes) {
            slot.trials.push(o);
        }
    }
    Ok(ComparisonResult {
        batch: batch.clone(),
        oracle_metrics,
        solvers,
    })
}
