//! Average sizes of the fixed-point, convergence and optimal sets.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_dir, fmt_float, gaussian_instance, Csv};
use crate::baselines::enumerate_sets;
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetsConfig {
    /// Row count d of the generated `d x N` Gaussian instances.
    pub dim: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Instances per value of N.
    pub trials: usize,
    pub seed: u64,
}

impl Default for SetsConfig {
    fn default() -> Self {
        SetsConfig {
            dim: 2,
            n_min: 2,
            n_max: 7,
            trials: 1000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetsRow {
    pub n: usize,
    pub mean_phi: f64,
    pub mean_omega: f64,
    pub mean_optimal: f64,
    pub violations: usize,
}

#[derive(Clone, Debug)]
pub struct SetsResult {
    pub rows: Vec<SetsRow>,
}

impl SetsResult {
    pub fn total_violations(&self) -> usize {
        self.rows.iter().map(|r| r.violations).sum()
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        ensure_dir(dir)?;
        let mut csv = Csv::new(&["n", "mean_phi", "mean_omega", "mean_b", "violations"]);
        for r in &self.rows {
            csv.row(&[
                r.n.to_string(),
                fmt_float(r.mean_phi),
                fmt_float(r.mean_omega),
                fmt_float(r.mean_optimal),
                r.violations.to_string(),
            ]);
        }
        Ok(vec![csv.write(dir, "sets.csv")?])
    }
}

/// Enumerates the three sets for `trials` instances at each N in
/// `n_min..=n_max`; cardinalities count `b` and `-b` separately.
pub fn run_sets(cfg: &SetsConfig) -> Result<SetsResult> {
    if cfg.n_min < 1 || cfg.n_min > cfg.n_max || cfg.trials == 0 {
        return Err(Error::Precondition(format!(
            "need 1 <= n_min <= n_max and trials > 0, got n = {}..={}, trials = {}",
            cfg.n_min, cfg.n_max, cfg.trials
        )));
    }
    let rows = (cfg.n_min..=cfg.n_max)
        .map(|n| {
            let counts = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    // trial index spaces for different N must not overlap
                    let trial = ((n as u64) << 32) | t as u64;
                    let x = DataMatrix::new(gaussian_instance(cfg.dim, n, cfg.dim, cfg.seed, trial))?;
                    let s = enumerate_sets(&x)?;
                    Ok([s.phi_count(), s.omega_count(), s.optimal_count(), s.inclusion_violations()])
                })
                .collect::<Result<Vec<_>>>()?;
            let mean = |i: usize| counts.iter().map(|c| c[i] as f64).sum::<f64>() / cfg.trials as f64;
            Ok(SetsRow {
                n,
                mean_phi: mean(0),
                mean_omega: mean(1),
                mean_optimal: mean(2),
                violations: counts.iter().map(|c| c[3]).sum(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SetsResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_holds_and_sizes_are_ordered() {
        let r = run_sets(&SetsConfig {
            trials: 100,
            ..SetsConfig::default()
        })
        .unwrap();
        assert_eq!(r.rows.len(), 6);
        assert_eq!(r.total_violations(), 0);
        for row in &r.rows {
            assert!(row.mean_phi >= row.mean_omega && row.mean_omega >= row.mean_optimal);
            assert!(row.mean_optimal >= 2.0);
        }
    }
}
