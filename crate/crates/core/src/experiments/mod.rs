//! Monte-Carlo experiments and their CSV artifacts.

mod classify;
mod compare;
mod initcdf;
mod linefit;
mod sets;

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{rng_for, stream};

pub use classify::{subspace_classify, ClassifyConfig, ClassifyResult, FitMethod, RocCurve};
pub use compare::{run_comparison, ComparisonResult, OutlierSpec, SolverOutcomes, TrialBatch, TrialOutcome};
pub use initcdf::{run_init_cdf, InitCdfConfig, InitCdfResult};
pub use linefit::{line_fit_demo, LineFitConfig, LineFitResult};
pub use sets::{run_sets, SetsConfig, SetsResult, SetsRow};

/// Degradations at or below this are counted as exact recovery.
pub const EXACT_TOL: f64 = 1e-8;

/// `(oracle - metric) / oracle`, clamped to `[0, 1]`.
pub fn degradation(metric: f64, oracle_metric: f64) -> Result<f64> {
    if !(oracle_metric > 0.0) {
        return Err(Error::Degenerate(
            "oracle metric is zero, degradation is undefined".into(),
        ));
    }
    let delta = (oracle_metric - metric) / oracle_metric;
    if delta < -1e-9 {
        log::warn!("solver metric exceeds the oracle by {:.3e} (relative)", -delta);
    }
    // roundoff-level differences count as a perfect match
    Ok(if delta <= 1e-12 { 0.0 } else { delta.min(1.0) })
}

/// Distinct sorted values with the fraction of samples at or below each.
pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / total;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = p,
            _ => out.push((v, p)),
        }
    }
    out
}

/// `%.12g`-style rendering used by every CSV column.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (11 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Minimal CSV builder; every artifact has a header row.
pub(crate) struct Csv {
    text: String,
}

impl Csv {
    pub(crate) fn new(header: &[&str]) -> Self {
        Csv {
            text: header.join(",") + "\n",
        }
    }

    pub(crate) fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub(crate) fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, &self.text).map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(path)
    }
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

/// Standard Gaussian `dim x samples` matrix of rank `rank` (product of two
/// Gaussian factors when `rank < dim`), reproducible from `(seed, trial)`.
pub fn gaussian_instance(dim: usize, samples: usize, rank: usize, seed: u64, trial: u64) -> DMatrix<f64> {
    let mut rng = rng_for(seed, &[stream::TRIAL, trial]);
    let mut draw = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng));
    if rank >= dim {
        draw(dim, samples)
    } else {
        let a = draw(dim, rank);
        a * draw(rank, samples)
    }
}
