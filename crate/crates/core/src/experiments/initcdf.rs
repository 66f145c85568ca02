//! Flip counts and final metrics of sv-sign versus random starts.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_dir, fmt_float, gaussian_instance, Csv};
use crate::config::{Init, SolverConfig};
use crate::error::Result;
use crate::linalg::DataMatrix;
use crate::rng::{derive_seed, stream};
use crate::solver_k1::bit_flip_solve;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitCdfConfig {
    pub dim: usize,
    pub samples: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for InitCdfConfig {
    fn default() -> Self {
        InitCdfConfig {
            dim: 3,
            samples: 20,
            trials: 1000,
            seed: 0,
        }
    }
}

/// Per-trial `(flips, metric)` of one L = 1 run from each initialization.
#[derive(Clone, Debug)]
pub struct InitCdfResult {
    pub samples: usize,
    pub sv_sign: Vec<(usize, f64)>,
    pub random: Vec<(usize, f64)>,
    pub all_converged: bool,
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m] as f64
    } else {
        (v[m - 1] + v[m]) as f64 / 2.0
    }
}

impl InitCdfResult {
    pub fn median_flips(&self, sv_sign: bool) -> f64 {
        median(self.side(sv_sign).iter().map(|r| r.0).collect())
    }

    pub fn max_flips(&self, sv_sign: bool) -> usize {
        self.side(sv_sign).iter().map(|r| r.0).max().unwrap_or(0)
    }

    /// Fraction of trials where the sv-sign run is at least as good.
    pub fn sv_sign_win_rate(&self) -> f64 {
        let wins = self
            .sv_sign
            .iter()
            .zip(&self.random)
            .filter(|(s, r)| s.1 >= r.1)
            .count();
        wins as f64 / self.sv_sign.len() as f64
    }

    fn side(&self, sv_sign: bool) -> &[(usize, f64)] {
        if sv_sign {
            &self.sv_sign
        } else {
            &self.random
        }
    }

    /// `initcdf_flips.csv` (flip count, cumulative fraction per init) and
    /// `initcdf_summary.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        ensure_dir(dir)?;
        let total = self.sv_sign.len() as f64;
        let cum = |side: &[(usize, f64)], f: usize| side.iter().filter(|r| r.0 <= f).count() as f64 / total;
        let mut flips = Csv::new(&["flips", "svsign", "random"]);
        for f in 0..=self.samples {
            flips.row(&[f.to_string(), fmt_float(cum(&self.sv_sign, f)), fmt_float(cum(&self.random, f))]);
        }
        let mut summary = Csv::new(&["init", "median_flips", "max_flips", "mean_metric"]);
        for (name, sv) in [("svsign", true), ("random", false)] {
            let side = self.side(sv);
            summary.row(&[
                name.to_string(),
                fmt_float(self.median_flips(sv)),
                self.max_flips(sv).to_string(),
                fmt_float(side.iter().map(|r| r.1).sum::<f64>() / total),
            ]);
        }
        summary.row(&[
            "svsign_ge_random".to_string(),
            fmt_float(self.sv_sign_win_rate()),
            String::new(),
            String::new(),
        ]);
        Ok(vec![flips.write(dir, "initcdf_flips.csv")?, summary.write(dir, "initcdf_summary.csv")?])
    }
}

pub fn run_init_cdf(cfg: &InitCdfConfig) -> Result<InitCdfResult> {
    let pairs = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let x = DataMatrix::new(gaussian_instance(cfg.dim, cfg.samples, cfg.dim, cfg.seed, t as u64))?;
            let seed = derive_seed(cfg.seed, &[stream::TRIAL, t as u64]);
            let run = |init| {
                let r = bit_flip_solve(&x, &SolverConfig::default().with_init(init).with_seed(seed))?;
                Ok(((r.flips, r.l1_metric), r.converged))
            };
            Ok((run(Init::SvSign)?, run(Init::Random)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InitCdfResult {
        samples: cfg.samples,
        all_converged: pairs.iter().all(|(s, r)| s.1 && r.1),
        sv_sign: pairs.iter().map(|p| p.0 .0).collect(),
        random: pairs.iter().map(|p| p.1 .0).collect(),
    })
}
