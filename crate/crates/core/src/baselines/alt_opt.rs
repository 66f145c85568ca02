//! Alternating optimization `B = sgn(X^T Q)`, `Q = U(X B)`.

use std::time::Instant;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{pick_winner, Init, RunTrace, SolverConfig, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::{l1_metric, nuclear_norm, procrustes_completed, DataMatrix};
use crate::rng::{rng_for, stream};
use crate::signs::SignMatrix;

fn random_orthonormal(d: usize, k: usize, seed: u64, restart: usize) -> Result<DMatrix<f64>> {
    let mut rng = rng_for(seed, &[stream::RESTART, restart as u64]);
    let g = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
    Ok(procrustes_completed(&g)?.q)
}

fn initial_basis(x: &DataMatrix, k: usize, restart: usize, cfg: &SolverConfig) -> Result<DMatrix<f64>> {
    if restart > 0 {
        return random_orthonormal(x.dim(), k, cfg.seed, restart);
    }
    match &cfg.init {
        Init::SvSign => Ok(x.svd().u.columns(0, k).into_owned()),
        Init::Random => random_orthonormal(x.dim(), k, cfg.seed, 0),
        Init::Given(b) => {
            if b.len() != x.samples() {
                return Err(Error::Precondition(format!(
                    "initial sign vector has length {}, data has {} samples",
                    b.len(),
                    x.samples()
                )));
            }
            // the basis whose sign step reproduces b in every column
            let b = SignMatrix::replicate(b, k);
            Ok(procrustes_completed(&(x.x() * b.to_dmatrix()))?.q)
        }
    }
}

struct AltOptRun {
    basis: DMatrix<f64>,
    signs: SignMatrix,
    iterations: usize,
    trajectory: Vec<f64>,
    converged: bool,
    completed: bool,
}

fn alternate(x: &DMatrix<f64>, q0: DMatrix<f64>, cap: usize) -> Result<AltOptRun> {
    let mut q = q0;
    let mut trajectory = vec![l1_metric(x, &q)];
    let mut prev: Option<SignMatrix> = None;
    let mut iterations = 0;
    let mut completed = false;
    let mut converged = false;
    loop {
        let b = SignMatrix::sign_of(&x.tr_mul(&q));
        if prev.as_ref() == Some(&b) {
            converged = true;
            break;
        }
        if iterations == cap {
            prev = Some(b);
            break;
        }
        let polar = procrustes_completed(&(x * b.to_dmatrix()))?;
        q = polar.q;
        completed = polar.completed;
        iterations += 1;
        trajectory.push(l1_metric(x, &q));
        prev = Some(b);
    }
    Ok(AltOptRun {
        basis: q,
        signs: prev.expect("at least one sign step"),
        iterations,
        trajectory,
        converged,
        completed,
    })
}

/// K components by alternating between the sign step and the Procrustes
/// step until the sign matrix repeats or `cfg.flip_budget` (default NK)
/// basis updates have been made.
///
/// Start 1 is the leading K left singular vectors (`Init::SvSign`), a random
/// orthonormal basis (`Init::Random`), or the basis reproducing a given sign
/// vector; later starts are random orthonormal bases.
pub fn alt_opt_solve(x: &DataMatrix, k: usize, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    if k == 0 || k > x.rank() {
        return Err(Error::Precondition(format!(
            "need 1 <= K <= rank, got K = {k} with rank {}",
            x.rank()
        )));
    }
    let started = Instant::now();
    let cap = cfg.flip_budget.unwrap_or(x.samples() * k);
    let mut runs = Vec::with_capacity(cfg.restarts);
    let mut finals = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let run = alternate(x.x(), initial_basis(x, k, restart, cfg)?, cap)?;
        runs.push(RunTrace {
            flips: run.iterations,
            l1_metric: l1_metric(x.x(), &run.basis),
            trajectory: run.trajectory.clone(),
            converged: run.converged,
        });
        finals.push(run);
    }
    let winner = pick_winner(runs.iter().map(|r| r.l1_metric));
    let run = finals.swap_remove(winner);
    Ok(SolverReport {
        l1_metric: runs[winner].l1_metric,
        objective: nuclear_norm(&(x.x() * run.signs.to_dmatrix()))?,
        basis: run.basis,
        signs: run.signs,
        flips: run.iterations,
        converged: run.converged,
        restart_winner: winner,
        basis_completed: run.completed,
        runs,
        wall_time: started.elapsed(),
    })
}
