//! Dense kernels shared by the solvers: compact SVD, the Procrustes operator,
//! nuclear norms and the rank-1 symmetric eigen-update.

mod eig_update;

pub use eig_update::{rank1_eig_update, EigUpdateResult};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative threshold below which singular values are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

pub(crate) fn ensure_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    match m.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Input(format!(
            "{what} has a non-finite entry at ({}, {})",
            i % m.nrows().max(1),
            i / m.nrows().max(1)
        ))),
        None => Ok(()),
    }
}

/// Compact SVD factors `M = U diag(sigma) V^T`, singular values nonincreasing.
#[derive(Clone, Debug)]
pub struct CompactSvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl CompactSvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }
}

/// Factor `m`, dropping singular values at or below `rank_tol * sigma_max`.
pub fn compact_svd(m: &DMatrix<f64>, rank_tol: f64) -> Result<CompactSvd> {
    if !(rank_tol >= 0.0 && rank_tol.is_finite()) {
        return Err(Error::Precondition(format!(
            "rank tolerance must be finite and >= 0, got {rank_tol}"
        )));
    }
    if m.is_empty() {
        return Err(Error::Input("matrix is empty".into()));
    }
    ensure_finite(m, "matrix")?;

    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left factors requested");
    let vt = svd.v_t.expect("right factors requested");
    let s = svd.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let smax = s[order[0]];
    if smax <= 0.0 {
        return Err(Error::Input("matrix is identically zero (rank 0)".into()));
    }
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| s[i] > rank_tol * smax)
        .collect();

    let d = keep.len();
    let mut uk = DMatrix::zeros(m.nrows(), d);
    let mut vk = DMatrix::zeros(m.ncols(), d);
    let mut sk = DVector::zeros(d);
    for (j, &i) in keep.iter().enumerate() {
        uk.set_column(j, &u.column(i));
        vk.set_column(j, &vt.row(i).transpose());
        sk[j] = s[i];
    }
    Ok(CompactSvd {
        u: uk,
        sigma: sk,
        v: vk,
    })
}

/// A real `D x N` data matrix together with its cached compact SVD and the
/// reduced `d x N` matrix `Y = Sigma V^T`, which shares its Gram matrix with X.
#[derive(Clone, Debug)]
pub struct DataMatrix {
    x: DMatrix<f64>,
    svd: CompactSvd,
    y: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        Self::with_rank_tol(x, DEFAULT_RANK_TOL)
    }

    pub fn with_rank_tol(x: DMatrix<f64>, rank_tol: f64) -> Result<Self> {
        let svd = compact_svd(&x, rank_tol)?;
        let y = DMatrix::from_diagonal(&svd.sigma) * svd.v.transpose();
        Ok(DataMatrix { x, svd, y })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Input(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Reduced data `Y = Sigma V^T`.
    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn svd(&self) -> &CompactSvd {
        &self.svd
    }

    pub fn rank(&self) -> usize {
        self.svd.rank()
    }

    /// Dimension `D`.
    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    /// Sample count `N`.
    pub fn samples(&self) -> usize {
        self.x.ncols()
    }

    pub fn frobenius(&self) -> f64 {
        self.x.norm()
    }

    pub fn sigma_max(&self) -> f64 {
        self.svd.sigma[0]
    }

    /// `Y^T Y`, equal to `X^T X` up to the truncated tail.
    pub fn gram(&self) -> DMatrix<f64> {
        self.y.tr_mul(&self.y)
    }
}

/// Sum of singular values.
pub fn nuclear_norm(a: &DMatrix<f64>) -> Result<f64> {
    ensure_finite(a, "matrix")?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.singular_values().sum())
}

/// Entrywise L1 norm of `X^T Q`.
pub fn l1_metric(x: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    x.tr_mul(q).iter().map(|v| v.abs()).sum()
}

/// The polar factor `U V^T` of a tall matrix with full column rank.
pub fn procrustes(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let polar = polar_factor(a)?;
    if polar.completed {
        return Err(Error::RankDeficient {
            rank: polar.rank,
            cols: a.ncols(),
        });
    }
    Ok(polar.q)
}

/// Result of [`procrustes_completed`].
#[derive(Clone, Debug)]
pub struct PolarFactor {
    pub q: DMatrix<f64>,
    pub rank: usize,
    /// True when missing singular directions were filled in.
    pub completed: bool,
}

/// Procrustes operator that stays total on rank-deficient input: the
/// directions belonging to vanishing singular values are replaced by a
/// deterministic orthonormal basis of the respective complements.
pub fn procrustes_completed(a: &DMatrix<f64>) -> Result<PolarFactor> {
    polar_factor(a)
}

fn polar_factor(a: &DMatrix<f64>) -> Result<PolarFactor> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Precondition(format!(
            "Procrustes needs rows >= columns, got {m}x{n}"
        )));
    }
    ensure_finite(a, "Procrustes argument")?;
    if n == 0 {
        return Ok(PolarFactor {
            q: DMatrix::zeros(m, 0),
            rank: 0,
            completed: false,
        });
    }

    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left factors requested");
    let vt = svd.v_t.expect("right factors requested");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
    let smax = s[order[0]];
    let rank = order
        .iter()
        .filter(|&&i| smax > 0.0 && s[i] > DEFAULT_RANK_TOL * smax)
        .count();

    let mut ur = DMatrix::zeros(m, rank);
    let mut vr = DMatrix::zeros(n, rank);
    for (j, &i) in order.iter().take(rank).enumerate() {
        ur.set_column(j, &u.column(i));
        vr.set_column(j, &vt.row(i).transpose());
    }
    let mut q = &ur * vr.transpose();
    if rank < n {
        let uc = orthonormal_complement(&ur, n - rank);
        let vc = orthonormal_complement(&vr, n - rank);
        q += uc * vc.transpose();
    }
    Ok(PolarFactor {
        q,
        rank,
        completed: rank < n,
    })
}

/// `count` orthonormal vectors orthogonal to the columns of `basis`, built by
/// Gram-Schmidt over the canonical axes, always taking the axis with the
/// largest residual next (lowest index on ties).
pub(crate) fn orthonormal_complement(basis: &DMatrix<f64>, count: usize) -> DMatrix<f64> {
    let dim = basis.nrows();
    let mut cols: Vec<DVector<f64>> = basis.column_iter().map(|c| c.into_owned()).collect();
    let mut out = DMatrix::zeros(dim, count);
    for j in 0..count {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for axis in 0..dim {
            let mut r = DVector::zeros(dim);
            r[axis] = 1.0;
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dot(&r);
                    r.axpy(-proj, c, 1.0);
                }
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("dimension is positive");
        let r = r / norm;
        out.set_column(j, &r);
        cols.push(r);
    }
    out
}
