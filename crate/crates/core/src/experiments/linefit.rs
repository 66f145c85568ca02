//! Line fitting through a 2-D Gaussian cloud with a few gross outliers.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, Matrix2, Vector2};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ensure_dir, fmt_float, Csv};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::{compact_svd, DataMatrix, DEFAULT_RANK_TOL};
use crate::rng::{derive_seed, rng_for, stream};
use crate::solver_k1::bit_flip_solve;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineFitConfig {
    pub samples: usize,
    /// Row-major covariance of the nominal points.
    pub covariance: [[f64; 2]; 2],
    /// Outlier coordinates; `None` selects [`default_outliers`].
    pub outliers: Option<Vec<[f64; 2]>>,
    pub seed: u64,
    pub repetitions: usize,
    pub restarts: usize,
}

impl Default for LineFitConfig {
    fn default() -> Self {
        LineFitConfig {
            samples: 100,
            covariance: [[4.0, 10.0], [10.0, 29.0]],
            outliers: None,
            seed: 0,
            repetitions: 200,
            restarts: 1,
        }
    }
}

fn covariance(cfg: &LineFitConfig) -> Matrix2<f64> {
    let c = cfg.covariance;
    Matrix2::new(c[0][0], c[0][1], c[1][0], c[1][1])
}

/// Unit vector with its largest-magnitude entry positive.
fn oriented(v: Vector2<f64>) -> Vector2<f64> {
    let v = v.normalize();
    if v[0].abs() >= v[1].abs() && v[0] < 0.0 || v[1].abs() > v[0].abs() && v[1] < 0.0 {
        -v
    } else {
        v
    }
}

/// `(sqrt(lambda_max), major axis, minor axis)`.
fn principal_axes(cov: &Matrix2<f64>) -> (f64, Vector2<f64>, Vector2<f64>) {
    let eig = cov.symmetric_eigen();
    let (hi, lo) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    (
        eig.eigenvalues[hi].sqrt(),
        oriented(eig.eigenvectors.column(hi).into_owned()),
        oriented(eig.eigenvectors.column(lo).into_owned()),
    )
}

/// Four points on one ray 30 degrees off the minor axis, at 0.9 to 1.2
/// times three major-axis standard deviations from the origin.
pub fn default_outliers(cov: [[f64; 2]; 2]) -> Vec<[f64; 2]> {
    let (s_major, major, minor) = principal_axes(&Matrix2::new(cov[0][0], cov[0][1], cov[1][0], cov[1][1]));
    let ray = minor * 30f64.to_radians().cos() + major * 30f64.to_radians().sin();
    [0.9, 1.0, 1.1, 1.2]
        .iter()
        .map(|f| {
            let p = ray * (3.0 * s_major * f);
            [p[0], p[1]]
        })
        .collect()
}

/// Angle between two lines through the origin, in degrees.
pub fn line_angle_deg(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let c = (a.dot(b).abs() / (a.norm() * b.norm())).min(1.0);
    c.acos().to_degrees()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineDirections {
    pub l2_clean: Vector2<f64>,
    pub l1_clean: Vector2<f64>,
    pub l2_corrupted: Vector2<f64>,
    pub l1_corrupted: Vector2<f64>,
}

#[derive(Clone, Debug)]
pub struct LineFitResult {
    pub truth: Vector2<f64>,
    /// Nominal points of the first repetition.
    pub nominal: DMatrix<f64>,
    pub outliers: DMatrix<f64>,
    /// Fitted directions for every repetition.
    pub fits: Vec<LineDirections>,
}

impl LineFitResult {
    /// Mean angle to the true direction of `(L1, L2)` fits on corrupted data.
    pub fn mean_corrupted_errors(&self) -> (f64, f64) {
        let n = self.fits.len() as f64;
        let l1 = self.fits.iter().map(|f| line_angle_deg(&f.l1_corrupted, &self.truth)).sum::<f64>();
        let l2 = self.fits.iter().map(|f| line_angle_deg(&f.l2_corrupted, &self.truth)).sum::<f64>();
        (l1 / n, l2 / n)
    }

    /// `linefit_points.csv`, `linefit_lines.csv` (first repetition) and
    /// `linefit_angles.csv` (angle to the true direction per repetition).
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        ensure_dir(dir)?;
        let mut points = Csv::new(&["x", "y", "kind"]);
        for (m, kind) in [(&self.nominal, "nominal"), (&self.outliers, "outlier")] {
            for c in m.column_iter() {
                points.row(&[fmt_float(c[0]), fmt_float(c[1]), kind.to_string()]);
            }
        }
        let first = &self.fits[0];
        let mut lines = Csv::new(&["line", "dx", "dy", "angle_to_true_deg"]);
        for (name, v) in [
            ("true", self.truth),
            ("l2_clean", first.l2_clean),
            ("l1_clean", first.l1_clean),
            ("l2_corrupted", first.l2_corrupted),
            ("l1_corrupted", first.l1_corrupted),
        ] {
            lines.row(&[
                name.to_string(),
                fmt_float(v[0]),
                fmt_float(v[1]),
                fmt_float(line_angle_deg(&v, &self.truth)),
            ]);
        }
        let mut angles = Csv::new(&["repetition", "l2_clean", "l1_clean", "l2_corrupted", "l1_corrupted"]);
        for (i, f) in self.fits.iter().enumerate() {
            let mut row = vec![i.to_string()];
            for v in [f.l2_clean, f.l1_clean, f.l2_corrupted, f.l1_corrupted] {
                row.push(fmt_float(line_angle_deg(&v, &self.truth)));
            }
            angles.row(&row);
        }
        Ok(vec![
            points.write(dir, "linefit_points.csv")?,
            lines.write(dir, "linefit_lines.csv")?,
            angles.write(dir, "linefit_angles.csv")?,
        ])
    }
}

fn fit(points: &DMatrix<f64>, seed: u64, restarts: usize) -> Result<(Vector2<f64>, Vector2<f64>)> {
    let svd = compact_svd(points, DEFAULT_RANK_TOL)?;
    let l2 = oriented(Vector2::new(svd.u[(0, 0)], svd.u[(1, 0)]));
    let x = DataMatrix::new(points.clone())?;
    let r = bit_flip_solve(&x, &SolverConfig::default().with_seed(seed).with_restarts(restarts))?;
    let q = r.q();
    Ok((l2, oriented(Vector2::new(q[0], q[1]))))
}

pub fn line_fit_demo(cfg: &LineFitConfig) -> Result<LineFitResult> {
    let cov = covariance(cfg);
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Precondition("covariance must be positive definite".into()))?;
    if cfg.samples < 2 || cfg.repetitions == 0 {
        return Err(Error::Precondition("need at least 2 samples and 1 repetition".into()));
    }
    let l = chol.l();
    let (_, truth, _) = principal_axes(&cov);
    let outlier_list = cfg.outliers.clone().unwrap_or_else(|| default_outliers(cfg.covariance));
    let outliers = DMatrix::from_fn(2, outlier_list.len(), |r, c| outlier_list[c][r]);

    let draw = |rep: usize| {
        let mut rng = rng_for(cfg.seed, &[stream::TRIAL, rep as u64]);
        let z: DMatrix<f64> = DMatrix::from_fn(2, cfg.samples, |_, _| StandardNormal.sample(&mut rng));
        DMatrix::from_fn(2, cfg.samples, |r, c| l[(r, 0)] * z[(0, c)] + l[(r, 1)] * z[(1, c)])
    };
    let fits = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| {
            let nominal = draw(rep);
            let seed = derive_seed(cfg.seed, &[stream::TRIAL, rep as u64]);
            let (l2_clean, l1_clean) = fit(&nominal, seed, cfg.restarts)?;
            let mut corrupted = nominal.clone().resize_horizontally(cfg.samples + outliers.ncols(), 0.0);
            corrupted.columns_mut(cfg.samples, outliers.ncols()).copy_from(&outliers);
            let (l2_corrupted, l1_corrupted) = fit(&corrupted, seed, cfg.restarts)?;
            Ok(LineDirections {
                l2_clean,
                l1_clean,
                l2_corrupted,
                l1_corrupted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LineFitResult {
        truth,
        nominal: draw(0),
        outliers,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn true_direction_of_reference_covariance() {
        let (s, major, minor) = principal_axes(&covariance(&LineFitConfig::default()));
        // lambda_max = (33 + sqrt(1025)) / 2
        assert!((s * s - (33.0 + 1025f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(major.dot(&minor).abs() < 1e-12);
        assert!(major[1] > major[0] && major[0] > 0.0);
    }

    #[test]
    fn clean_fits_agree() {
        let r = line_fit_demo(&LineFitConfig {
            repetitions: 10,
            ..LineFitConfig::default()
        })
        .unwrap();
        for f in &r.fits {
            assert!(line_angle_deg(&f.l1_clean, &f.l2_clean) < 5.0);
        }
    }

    #[test]
    fn outliers_pull_l2_more() {
        let r = line_fit_demo(&LineFitConfig {
            repetitions: 40,
            ..LineFitConfig::default()
        })
        .unwrap();
        let (l1, l2) = r.mean_corrupted_errors();
        assert!(l1 < l2, "L1 {l1} vs L2 {l2}");
    }

    #[test]
    fn angles_are_axial() {
        let a = Vector2::new(1.0, 0.0);
        assert!((line_angle_deg(&a, &Vector2::new(-1.0, 1e-9))).abs() < 1e-6);
        assert!((line_angle_deg(&a, &Vector2::new(0.0, 2.0)) - 90.0).abs() < 1e-12);
    }
}
