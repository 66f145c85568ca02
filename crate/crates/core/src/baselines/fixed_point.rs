//! Fixed-point iteration `b <- sgn(X^T X b)` with successive nullspace
//! projections for K > 1.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::config::{pick_winner, Init, RunTrace, SolverConfig, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::{compact_svd, l1_metric, nuclear_norm, DataMatrix, DEFAULT_RANK_TOL};
use crate::rng::derive_seed;
use crate::signs::{SignMatrix, SignVector};
use crate::solver_k1::{gaussian_vector, normalized_direction, random_signs, sv_sign_init};

struct FixedPointRun {
    bits: SignVector,
    iterations: usize,
    trajectory: Vec<f64>,
    converged: bool,
}

fn iterate(x: &DMatrix<f64>, gram: &DMatrix<f64>, start: SignVector, cap: usize) -> FixedPointRun {
    let mut b = start;
    let mut trajectory = vec![(x * b.to_dvector()).norm()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cap {
        let next = SignVector::sign_of((gram * b.to_dvector()).iter());
        if next == b {
            converged = true;
            break;
        }
        b = next;
        iterations += 1;
        trajectory.push((x * b.to_dvector()).norm());
    }
    if !converged {
        converged = SignVector::sign_of((gram * b.to_dvector()).iter()) == b;
    }
    FixedPointRun {
        bits: b,
        iterations,
        trajectory,
        converged,
    }
}

/// Seed used for component `c`: the run seed itself for the first
/// component, so that K = 1 shares its starts with the bit-flipping solver.
fn component_seed(seed: u64, c: usize) -> u64 {
    if c == 0 {
        seed
    } else {
        derive_seed(seed, &[c as u64])
    }
}

fn start_for(
    x: &DataMatrix,
    xc: &DMatrix<f64>,
    c: usize,
    restart: usize,
    cfg: &SolverConfig,
) -> Result<SignVector> {
    let n = x.samples();
    let seed = component_seed(cfg.seed, c);
    if restart > 0 {
        return Ok(if c == 0 {
            let a = gaussian_vector(x.rank(), seed, restart);
            SignVector::sign_of(x.y().tr_mul(&a).iter())
        } else {
            let a = gaussian_vector(x.dim(), seed, restart);
            SignVector::sign_of(xc.tr_mul(&a).iter())
        });
    }
    Ok(match &cfg.init {
        Init::SvSign if c == 0 => sv_sign_init(x.y()),
        Init::SvSign => {
            let svd = compact_svd(xc, DEFAULT_RANK_TOL)?;
            SignVector::sign_of((svd.v.column(0) * svd.sigma[0]).iter())
        }
        Init::Random => random_signs(n, seed),
        Init::Given(b) => {
            if b.len() != n {
                return Err(Error::Precondition(format!(
                    "initial sign vector has length {}, data has {n} samples",
                    b.len()
                )));
            }
            b.clone()
        }
    })
}

/// K components by fixed-point iteration, deflating the data onto the
/// orthogonal complement of each found component before the next one.
///
/// Each start of each component runs for at most `cfg.flip_budget`
/// (default N) sign updates; the start with the largest `|X_c^T q|_1` on the
/// deflated data `X_c` is kept. `runs` lists the starts component-major and
/// `restart_winner` refers to the first component.
pub fn fixed_point_solve(x: &DataMatrix, k: usize, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    if k == 0 || k > x.rank() {
        return Err(Error::Precondition(format!(
            "need 1 <= K <= rank, got K = {k} with rank {}",
            x.rank()
        )));
    }
    let started = Instant::now();
    let n = x.samples();
    let cap = cfg.flip_budget.unwrap_or(n);

    let mut xc = x.x().clone();
    let mut basis = DMatrix::zeros(x.dim(), k);
    let mut columns = Vec::with_capacity(k);
    let mut runs = Vec::with_capacity(k * cfg.restarts);
    let mut flips = 0;
    let mut converged = true;
    let mut first_winner = 0;
    for c in 0..k {
        let gram = xc.tr_mul(&xc);
        let mut finals = Vec::with_capacity(cfg.restarts);
        let mut traces = Vec::with_capacity(cfg.restarts);
        for restart in 0..cfg.restarts {
            let start = start_for(x, &xc, c, restart, cfg)?;
            let run = iterate(&xc, &gram, start, cap);
            let q = normalized_direction(&xc, &run.bits)?;
            traces.push(RunTrace {
                flips: run.iterations,
                l1_metric: xc.tr_mul(&q).iter().map(|v| v.abs()).sum(),
                trajectory: run.trajectory,
                converged: run.converged,
            });
            finals.push((run.bits, q));
        }
        let winner = pick_winner(traces.iter().map(|t| t.l1_metric));
        if c == 0 {
            first_winner = winner;
        }
        flips += traces[winner].flips;
        converged &= traces[winner].converged;
        let (b, q) = finals.swap_remove(winner);
        let projection = q.tr_mul(&xc);
        xc -= &q * projection;
        basis.set_column(c, &q);
        columns.push(b);
        runs.extend(traces);
    }

    let signs = SignMatrix::from_columns(&columns)?;
    Ok(SolverReport {
        l1_metric: l1_metric(x.x(), &basis),
        objective: nuclear_norm(&(x.x() * signs.to_dmatrix()))?,
        basis,
        signs,
        flips,
        converged,
        restart_winner: first_winner,
        basis_completed: false,
        runs,
        wall_time: started.elapsed(),
    })
}
