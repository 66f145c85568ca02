//! Two-class subspace detector on a synthetic surrogate cohort, with
//! deliberately mislabeled training points.
//!
//! Each class is Gaussian around its own mean with most of its variance in
//! a class-specific K-dimensional subspace; class M is spread wider than
//! class N, so that M samples mislabeled as N land far from the N cloud. A held-out point `x` is scored
//! by `s(x) = |Q_M^T (x - m_M)|^2 - |Q_N^T (x - m_N)|^2` and flagged as
//! class M when `s(x) > lambda`.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_dir, fmt_float, Csv};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::{compact_svd, procrustes, DataMatrix, DEFAULT_RANK_TOL};
use crate::rng::{derive_seed, rng_for, stream};
use crate::solver_kk::bit_flip_solve_k;
use crate::solver_k1::bit_flip_solve;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    L2,
    L1,
}

impl FitMethod {
    pub fn name(self) -> &'static str {
        match self {
            FitMethod::L2 => "l2",
            FitMethod::L1 => "l1",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub dim: usize,
    /// Samples per class in the cohort.
    pub per_class: usize,
    /// Training samples drawn per class in each split.
    pub train: usize,
    pub k: usize,
    /// Numbers of training points exchanged between the classes.
    pub mislabeled: Vec<usize>,
    pub splits: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Standard deviations along the K class directions.
    pub signal_scales: Vec<f64>,
    /// Per-class multipliers of `signal_scales`, `[M, N]`.
    pub class_scales: [f64; 2],
    /// Isotropic noise standard deviation.
    pub noise: f64,
    /// Standard deviation of the class means.
    pub mean_scale: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            dim: 9,
            per_class: 19,
            train: 10,
            k: 3,
            mislabeled: vec![0, 2, 4],
            splits: 2000,
            restarts: 1,
            seed: 0,
            signal_scales: vec![3.0, 3.0, 3.0],
            class_scales: [5.0, 1.0],
            noise: 0.5,
            mean_scale: 0.5,
        }
    }
}

/// Exact empirical ROC: one point per distinct score used as threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    pub method: FitMethod,
    pub mislabeled: usize,
    /// `(lambda, false-alarm frequency, detection frequency)`, lambda
    /// decreasing from `+inf` to `-inf`.
    pub points: Vec<(f64, f64, f64)>,
}

impl RocCurve {
    /// `scores` pairs each held-out score with "is class M".
    pub fn from_scores(method: FitMethod, mislabeled: usize, scores: &[(f64, bool)]) -> Result<Self> {
        let positives = scores.iter().filter(|s| s.1).count();
        let negatives = scores.len() - positives;
        if positives == 0 || negatives == 0 {
            return Err(Error::Precondition("held-out set needs points of both classes".into()));
        }
        let mut sorted = scores.to_vec();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut points = vec![(f64::INFINITY, 0.0, 0.0)];
        let (mut tp, mut fp) = (0usize, 0usize);
        let mut i = 0;
        while i < sorted.len() {
            let lambda = sorted[i].0;
            // points at exactly lambda are not flagged (strict rule); they
            // join at the next lower threshold
            points.push((lambda, fp as f64 / negatives as f64, tp as f64 / positives as f64));
            while i < sorted.len() && sorted[i].0 == lambda {
                if sorted[i].1 {
                    tp += 1;
                } else {
                    fp += 1;
                }
                i += 1;
            }
        }
        points.push((f64::NEG_INFINITY, 1.0, 1.0));
        Ok(RocCurve {
            method,
            mislabeled,
            points,
        })
    }

    /// Area under the curve by the trapezoid rule over the exact points,
    /// which counts tied scores as half.
    pub fn auc(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) * (w[1].2 + w[0].2) / 2.0)
            .sum()
    }

    pub fn label(&self) -> String {
        format!("{}_p{}", self.method.name(), self.mislabeled)
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyResult {
    pub curves: Vec<RocCurve>,
}

impl ClassifyResult {
    pub fn curve(&self, method: FitMethod, mislabeled: usize) -> Option<&RocCurve> {
        self.curves
            .iter()
            .find(|c| c.method == method && c.mislabeled == mislabeled)
    }

    /// `roc_<method>_p<p>.csv` per curve and `classify_summary.csv`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        ensure_dir(dir)?;
        let mut paths = Vec::new();
        let mut summary = Csv::new(&["method", "mislabeled", "auc"]);
        for c in &self.curves {
            let mut csv = Csv::new(&["lambda", "ffa", "fd"]);
            for &(l, ffa, fd) in &c.points {
                csv.row(&[fmt_float(l), fmt_float(ffa), fmt_float(fd)]);
            }
            paths.push(csv.write(dir, &format!("roc_{}.csv", c.label()))?);
            summary.row(&[c.method.name().to_string(), c.mislabeled.to_string(), fmt_float(c.auc())]);
        }
        paths.push(summary.write(dir, "classify_summary.csv")?);
        Ok(paths)
    }
}

/// Fixed surrogate cohort `(class M, class N)`, columns are samples.
pub fn surrogate_cohort(cfg: &ClassifyConfig) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if cfg.signal_scales.len() != cfg.k {
        return Err(Error::Input(format!(
            "signal_scales has {} entries, expected K = {}",
            cfg.signal_scales.len(),
            cfg.k
        )));
    }
    let mut rng = rng_for(cfg.seed, &[stream::FIXTURE]);
    let mut gauss = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng));
    let class = |gauss: &mut dyn FnMut(usize, usize) -> DMatrix<f64>, spread: f64| -> Result<DMatrix<f64>> {
        let basis = procrustes(&gauss(cfg.dim, cfg.k))?;
        let mean = gauss(cfg.dim, 1) * cfg.mean_scale;
        let scales = DMatrix::from_diagonal(&DVector::from_vec(cfg.signal_scales.clone())) * spread;
        let z = gauss(cfg.k, cfg.per_class);
        let noise = gauss(cfg.dim, cfg.per_class) * cfg.noise;
        let mut x = basis * scales * z + noise;
        for mut c in x.column_iter_mut() {
            c += &mean;
        }
        Ok(x)
    };
    let m = class(&mut gauss, cfg.class_scales[0])?;
    let n = class(&mut gauss, cfg.class_scales[1])?;
    Ok((m, n))
}

struct ClassModel {
    mean: DVector<f64>,
    basis: DMatrix<f64>,
}

impl ClassModel {
    fn fit(train: &DMatrix<f64>, k: usize, method: FitMethod, cfg: &SolverConfig) -> Result<Self> {
        let mean = train.column_mean();
        let mut centered = train.clone();
        for mut c in centered.column_iter_mut() {
            c -= &mean;
        }
        let basis = match method {
            FitMethod::L2 => {
                let svd = compact_svd(&centered, DEFAULT_RANK_TOL)?;
                if svd.rank() < k {
                    return Err(Error::Precondition(format!(
                        "centered training set has rank {} < K = {k}",
                        svd.rank()
                    )));
                }
                svd.u.columns(0, k).into_owned()
            }
            FitMethod::L1 => {
                let x = DataMatrix::new(centered)?;
                if k == 1 {
                    bit_flip_solve(&x, cfg)?.basis
                } else {
                    bit_flip_solve_k(&x, k, cfg)?.basis
                }
            }
        };
        Ok(ClassModel { mean, basis })
    }

    fn energy(&self, x: &DVector<f64>) -> f64 {
        self.basis.tr_mul(&(x - &self.mean)).norm_squared()
    }
}

/// Held-out scores of one random split.
fn split_scores(
    cohort: &(DMatrix<f64>, DMatrix<f64>),
    cfg: &ClassifyConfig,
    method: FitMethod,
    mislabeled: usize,
    split: usize,
) -> Result<Vec<(f64, bool)>> {
    let mut rng = rng_for(cfg.seed, &[stream::SPLIT, split as u64]);
    let mut order_m: Vec<usize> = (0..cfg.per_class).collect();
    let mut order_n = order_m.clone();
    order_m.shuffle(&mut rng);
    order_n.shuffle(&mut rng);
    let (train_m, test_m) = order_m.split_at(cfg.train);
    let (train_n, test_n) = order_n.split_at(cfg.train);

    // the first `mislabeled` training points of each class swap labels
    let gather = |own: &DMatrix<f64>, own_idx: &[usize], other: &DMatrix<f64>, other_idx: &[usize]| {
        let cols: Vec<DVector<f64>> = other_idx[..mislabeled]
            .iter()
            .map(|&i| other.column(i).into_owned())
            .chain(own_idx[mislabeled..].iter().map(|&i| own.column(i).into_owned()))
            .collect();
        DMatrix::from_columns(&cols)
    };
    let solver_cfg = SolverConfig::default()
        .with_restarts(cfg.restarts)
        .with_seed(derive_seed(cfg.seed, &[stream::SPLIT, split as u64]));
    let model_m = ClassModel::fit(&gather(&cohort.0, train_m, &cohort.1, train_n), cfg.k, method, &solver_cfg)?;
    let model_n = ClassModel::fit(&gather(&cohort.1, train_n, &cohort.0, train_m), cfg.k, method, &solver_cfg)?;

    let score = |x: DVector<f64>| model_m.energy(&x) - model_n.energy(&x);
    let mut out = Vec::with_capacity(test_m.len() + test_n.len());
    out.extend(test_m.iter().map(|&i| (score(cohort.0.column(i).into_owned()), true)));
    out.extend(test_n.iter().map(|&i| (score(cohort.1.column(i).into_owned()), false)));
    Ok(out)
}

/// ROC curves of both fitting methods for every mislabeling level, pooling
/// held-out scores over all splits.
pub fn subspace_classify(cfg: &ClassifyConfig) -> Result<ClassifyResult> {
    if cfg.train >= cfg.per_class {
        return Err(Error::Precondition(format!(
            "train = {} leaves no held-out points out of {}",
            cfg.train, cfg.per_class
        )));
    }
    if let Some(&p) = cfg.mislabeled.iter().find(|&&p| p > cfg.train) {
        return Err(Error::Precondition(format!("cannot mislabel {p} of {} training points", cfg.train)));
    }
    let cohort = surrogate_cohort(cfg)?;
    let mut curves = Vec::new();
    for &p in &cfg.mislabeled {
        for method in [FitMethod::L2, FitMethod::L1] {
            let scores: Vec<(f64, bool)> = (0..cfg.splits)
                .into_par_iter()
                .map(|s| split_scores(&cohort, cfg, method, p, s))
                .collect::<Result<Vec<_>>>()?
                .concat();
            curves.push(RocCurve::from_scores(method, p, &scores)?);
        }
    }
    Ok(ClassifyResult { curves })
}
