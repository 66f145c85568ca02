//! Bit-flipping search for K > 1 jointly optimal L1 principal components.
//!
//! The search maximizes `|YB|_*` over sign matrices by single-bit flips. A
//! flip of entry `(m, l)` changes column `l` of `YB` by `-2 B_ml y_m`, so the
//! Gram matrix of the candidate, rotated by the right singular vectors of
//! `YB`, is `S^2 + W G W^T` with `W = [V_l,: ; -2 B_ml S U^T y_m]` and the
//! 2x2 matrix `G = [[4|y_m|^2, 1], [1, 0]]`. Splitting `G` into its two
//! eigen-directions turns the candidate spectrum into two cascaded rank-1
//! updates of a diagonal matrix, each solved through the secular equation.

use std::time::Instant;

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::config::{pick_winner, Init, RunTrace, SolverConfig, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::{l1_metric, nuclear_norm, procrustes_completed, rank1_eig_update, DataMatrix};
use crate::signs::{SignMatrix, SignVector};
use crate::solver_k1::{first_start, gaussian_vector, sv_sign_init};

/// Relative factor of the default improvement threshold on `|YB|_*`,
/// scaled by `|Y|_F sqrt(K)`.
pub const DEFAULT_TOL_FACTOR: f64 = 1e-10;

/// Candidate eigenvalues below this fraction of the largest one are too
/// inaccurate for a square root; such candidates use a direct SVD.
const ILL_CONDITIONED: f64 = 1e-6;
/// Relative size of negative eigenvalues tolerated as rounding.
const NEGATIVE_EIG_TOL: f64 = 1e-9;

/// Per-iteration data shared by all candidate evaluations: the SVD of the
/// current `YB` and the projections `S U^T y_m` of every data column.
#[derive(Clone, Debug)]
pub struct FlipEvalContext {
    /// Singular values of `YB`.
    s: DVector<f64>,
    /// Right singular vectors of `YB`, `K x K`.
    v: DMatrix<f64>,
    /// `F^T Y` with `F = U S`, `K x N`.
    projections: DMatrix<f64>,
    /// `|y_m|^2`.
    col_norms2: Vec<f64>,
}

impl FlipEvalContext {
    pub fn new(y: &DMatrix<f64>, b: &SignMatrix) -> Result<Self> {
        let yb = y * b.to_dmatrix();
        Self::from_product(y, &yb)
    }

    fn from_product(y: &DMatrix<f64>, yb: &DMatrix<f64>) -> Result<Self> {
        let k = yb.ncols();
        if y.nrows() < k {
            return Err(Error::Precondition(format!(
                "K = {k} exceeds the data rank {}",
                y.nrows()
            )));
        }
        let svd = yb.clone().svd(true, true);
        let u = svd.u.expect("left factors requested");
        let v = svd.v_t.expect("right factors requested").transpose();
        let s = svd.singular_values;
        let f = &u * DMatrix::from_diagonal(&s);
        let projections = f.tr_mul(y);
        let col_norms2 = y.column_iter().map(|c| c.norm_squared()).collect();
        Ok(FlipEvalContext {
            s,
            v,
            projections,
            col_norms2,
        })
    }

    /// `|YB|_*` of the matrix the context was built from.
    pub fn nuclear(&self) -> f64 {
        self.s.sum()
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }
}

/// Candidate evaluation outcome: the fast path or the direct fallback.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CandidateValue {
    Fast(f64),
    /// The cascade was ill-conditioned; value from a direct SVD.
    Fallback(f64),
}

impl CandidateValue {
    pub fn value(self) -> f64 {
        match self {
            CandidateValue::Fast(v) | CandidateValue::Fallback(v) => v,
        }
    }
}

/// Spectrum of the candidate obtained by flipping `B_ml`, through the
/// cascaded rank-1 eigen-updates. Errors when rounding pushed an eigenvalue
/// clearly below zero or when the smallest eigenvalue is too small for its
/// square root to be accurate.
pub fn candidate_spectrum(ctx: &FlipEvalContext, m: usize, l: usize, b_ml: f64) -> Result<Vec<f64>> {
    let k = ctx.k();
    let g = 4.0 * ctx.col_norms2[m];
    // eigen-pairs of [[g, 1], [1, 0]]: d = (g +- sqrt(g^2 + 4)) / 2, q ~ (d, 1)
    let root = (g * g + 4.0).sqrt();
    let d1 = 0.5 * (g + root);
    let d2 = -2.0 / (g + root);
    let unit = |d: f64| {
        let n = d.hypot(1.0);
        (d / n, 1.0 / n)
    };
    let (q1a, q1b) = unit(d1);
    let (q2a, q2b) = unit(d2);

    let w1 = ctx.v.row(l).transpose();
    let w2 = ctx.projections.column(m) * (-2.0 * b_ml);
    let u1: Vec<f64> = (0..k).map(|i| q1a * w1[i] + q1b * w2[i]).collect();
    let u2 = DVector::from_fn(k, |i, _| q2a * w1[i] + q2b * w2[i]);

    let s2: Vec<f64> = ctx.s.iter().map(|s| s * s).collect();
    let first = rank1_eig_update(&s2, &u1, d1, true);
    let z = first.eigenvectors.expect("vectors requested");
    let rotated: Vec<f64> = z.tr_mul(&u2).iter().copied().collect();
    let second = rank1_eig_update(&first.eigenvalues, &rotated, d2, false);

    let lambdas = second.eigenvalues;
    let top = lambdas.first().copied().unwrap_or(0.0).max(0.0);
    let smallest = lambdas.last().copied().unwrap_or(0.0);
    if smallest < -NEGATIVE_EIG_TOL * top.max(1.0) {
        return Err(Error::Numerical(format!(
            "candidate ({m}, {l}) produced eigenvalue {smallest:e}"
        )));
    }
    if smallest < ILL_CONDITIONED * top {
        return Err(Error::Numerical(format!(
            "candidate ({m}, {l}) is numerically rank deficient"
        )));
    }
    Ok(lambdas)
}

/// `|YB - 2 B_ml y_m e_l^T|_*`, via the rank-1 cascade, falling back to a
/// direct SVD of the perturbed matrix when the cascade is unreliable.
pub fn flip_candidate_nuclear(
    ctx: &FlipEvalContext,
    y: &DMatrix<f64>,
    b: &SignMatrix,
    m: usize,
    l: usize,
) -> Result<CandidateValue> {
    let b_ml = b.get(m, l);
    match candidate_spectrum(ctx, m, l, b_ml) {
        Ok(lambdas) => Ok(CandidateValue::Fast(
            lambdas.iter().map(|v| v.max(0.0).sqrt()).sum(),
        )),
        Err(Error::Numerical(msg)) => {
            if !msg.ends_with("rank deficient") {
                warn!("{msg}; using a direct SVD");
            }
            let mut flipped = b.clone();
            flipped.flip(m, l);
            Ok(CandidateValue::Fallback(nuclear_norm(&(y * flipped.to_dmatrix()))?))
        }
        Err(e) => Err(e),
    }
}

/// Outcome of the bit-flipping loop on one start.
#[derive(Clone, Debug)]
pub struct BitFlipRunK {
    pub bits: SignMatrix,
    pub flips: usize,
    pub trajectory: Vec<f64>,
    pub converged: bool,
}

/// Bit-flipping iterations over `{+-1}^{N x K}` from `start`.
pub fn bit_flip_k(y: &DMatrix<f64>, start: SignMatrix, flip_budget: usize, tol: f64) -> Result<BitFlipRunK> {
    let nk = start.nrows() * start.ncols();
    let mut b = start;
    let mut unflipped = vec![true; nk];
    let mut unflipped_count = nk;
    let mut flips = 0;
    let mut converged = true;

    let mut ctx = FlipEvalContext::new(y, &b)?;
    let mut trajectory = vec![ctx.nuclear()];
    let mut values = vec![f64::NAN; nk];
    let mut evaluated = false;
    loop {
        if !evaluated {
            for (x, value) in values.iter_mut().enumerate() {
                let (m, l) = b.position(x);
                *value = flip_candidate_nuclear(&ctx, y, &b, m, l)?.value();
            }
            evaluated = true;
        }
        let omega = ctx.nuclear();
        let best = best_listed(&values, &unflipped);
        match best.filter(|&x| values[x] > omega + tol) {
            Some(x) => {
                if flips == flip_budget {
                    converged = false;
                    break;
                }
                let (m, l) = b.position(x);
                b.flip(m, l);
                if unflipped[x] {
                    unflipped[x] = false;
                    unflipped_count -= 1;
                }
                flips += 1;
                ctx = FlipEvalContext::new(y, &b)?;
                trajectory.push(ctx.nuclear());
                evaluated = false;
            }
            None if unflipped_count < nk => {
                unflipped.iter_mut().for_each(|u| *u = true);
                unflipped_count = nk;
            }
            None => break,
        }
    }
    if converged && values.iter().any(|&v| v > ctx.nuclear() + tol) {
        converged = false;
    }
    Ok(BitFlipRunK {
        bits: b,
        flips,
        trajectory,
        converged,
    })
}

/// Argmax over listed flat indices, lowest index on ties.
fn best_listed(values: &[f64], listed: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (x, &v) in values.iter().enumerate() {
        if listed[x] && best.is_none_or(|b| v > values[b]) {
            best = Some(x);
        }
    }
    best
}

/// K jointly computed L1 principal components by bit flipping.
///
/// Start 1 is `sgn(first row of Y) 1_K^T` (or `cfg.init` replicated);
/// starts `2..=L` are `sgn(a) 1_K^T` with `a` standard Gaussian of length N.
/// The basis is `Q = U(X B)`; the winner maximizes `|X^T Q|_1`.
pub fn bit_flip_solve_k(x: &DataMatrix, k: usize, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    if k == 0 || k > x.rank() {
        return Err(Error::Precondition(format!(
            "need 1 <= K <= rank, got K = {k} with rank {}",
            x.rank()
        )));
    }
    let started = Instant::now();
    let n = x.samples();
    let budget = cfg.flip_budget.unwrap_or(n * k);
    let tol = cfg
        .tol
        .unwrap_or(DEFAULT_TOL_FACTOR * x.y().norm() * (k as f64).sqrt());

    let mut runs = Vec::with_capacity(cfg.restarts);
    let mut finals = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let start = if restart == 0 {
            match cfg.init {
                Init::SvSign => sv_sign_init(x.y()),
                _ => first_start(x, cfg)?,
            }
        } else {
            SignVector::sign_of(gaussian_vector(n, cfg.seed, restart).iter())
        };
        let run = bit_flip_k(x.y(), SignMatrix::replicate(&start, k), budget, tol)?;
        let polar = procrustes_completed(&(x.x() * run.bits.to_dmatrix()))?;
        let metric = l1_metric(x.x(), &polar.q);
        runs.push(RunTrace {
            flips: run.flips,
            trajectory: run.trajectory,
            converged: run.converged,
            l1_metric: metric,
        });
        finals.push((run.bits, polar));
    }

    let winner = pick_winner(runs.iter().map(|r| r.l1_metric));
    let (b, polar) = finals.swap_remove(winner);
    let objective = nuclear_norm(&(x.y() * b.to_dmatrix()))?;
    Ok(SolverReport {
        l1_metric: runs[winner].l1_metric,
        objective,
        basis: polar.q,
        signs: b,
        flips: runs[winner].flips,
        converged: runs[winner].converged,
        restart_winner: winner,
        basis_completed: polar.completed,
        runs,
        wall_time: started.elapsed(),
    })
}
