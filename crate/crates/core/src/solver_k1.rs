//! Bit-flipping search for the leading L1 principal component.
//!
//! The search runs on the reduced data `Y` and its Gram matrix. Every bit
//! carries a contribution factor `alpha_n = 2 (b_n y_n^T Y b - |y_n|^2)`;
//! flipping bit `n` changes `|Yb|^2` by exactly `-2 alpha_n`, so the search
//! repeatedly flips the not-yet-flipped bit with the most negative factor and
//! updates all factors in O(N).

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::config::{pick_winner, Init, RunTrace, SolverConfig, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::{l1_metric, DataMatrix};
use crate::rng::{rng_for, stream};
use crate::signs::{SignMatrix, SignVector};

/// Relative factor of the default strict-improvement threshold on `|Yb|^2`.
pub const DEFAULT_TOL_FACTOR: f64 = 1e-12;

/// `b^(1) = sgn` of the first row of `Y`, i.e. of `sigma_1 v_1`.
pub fn sv_sign_init(y: &DMatrix<f64>) -> SignVector {
    SignVector::sign_of(y.row(0).iter())
}

/// `alpha(b, n)` for every `n`, from the Gram matrix `Y^T Y`.
pub fn contributions(gram: &DMatrix<f64>, b: &SignVector) -> Vec<f64> {
    let bv = b.to_dvector();
    let gb = gram * &bv;
    (0..b.len())
        .map(|n| 2.0 * (bv[n] * gb[n] - gram[(n, n)]))
        .collect()
}

/// `|Yb|_2`.
pub fn quad_metric(y: &DMatrix<f64>, b: &SignVector) -> f64 {
    (y * b.to_dvector()).norm()
}

/// Incrementally maintained search state of one start.
#[derive(Clone, Debug)]
pub struct ContributionState<'a> {
    gram: &'a DMatrix<f64>,
    bits: SignVector,
    alphas: Vec<f64>,
    quad: f64,
    unflipped: Vec<bool>,
    unflipped_count: usize,
}

impl<'a> ContributionState<'a> {
    pub fn new(gram: &'a DMatrix<f64>, bits: SignVector) -> Self {
        let n = bits.len();
        let alphas = contributions(gram, &bits);
        let bv = bits.to_dvector();
        let quad = bv.dot(&(gram * &bv));
        ContributionState {
            gram,
            bits,
            alphas,
            quad,
            unflipped: vec![true; n],
            unflipped_count: n,
        }
    }

    pub fn bits(&self) -> &SignVector {
        &self.bits
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Current `|Yb|^2`.
    pub fn quad(&self) -> f64 {
        self.quad
    }

    /// Index of the smallest factor among the not-yet-flipped bits.
    pub fn select(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (n, &a) in self.alphas.iter().enumerate() {
            if self.unflipped[n] && best.is_none_or(|b| a < self.alphas[b]) {
                best = Some(n);
            }
        }
        best
    }

    pub fn flip(&mut self, n: usize) {
        let bn = self.bits.get(n);
        let a = self.alphas[n];
        for (m, alpha) in self.alphas.iter_mut().enumerate() {
            if m != n {
                *alpha -= 4.0 * self.bits.get(m) * bn * self.gram[(m, n)];
            }
        }
        self.alphas[n] = -a;
        self.quad -= 2.0 * a;
        self.bits.flip(n);
        if self.unflipped[n] {
            self.unflipped[n] = false;
            self.unflipped_count -= 1;
        }
    }

    pub fn all_unflipped(&self) -> bool {
        self.unflipped_count == self.bits.len()
    }

    pub fn reset(&mut self) {
        self.unflipped.iter_mut().for_each(|u| *u = true);
        self.unflipped_count = self.bits.len();
    }

    /// Whether some bit (flipped or not) still improves by more than `tol`.
    pub fn has_improving_flip(&self, tol: f64) -> bool {
        self.alphas.iter().any(|&a| a < -tol)
    }
}

/// Outcome of the bit-flipping loop on one start.
#[derive(Clone, Debug)]
pub struct BitFlipRun {
    pub bits: SignVector,
    pub flips: usize,
    pub trajectory: Vec<f64>,
    pub converged: bool,
}

/// Run the bit-flipping iterations from `start` on the Gram matrix `gram`.
pub fn bit_flip(gram: &DMatrix<f64>, start: SignVector, flip_budget: usize, tol: f64) -> BitFlipRun {
    let mut state = ContributionState::new(gram, start);
    let mut trajectory = vec![state.quad()];
    let mut flips = 0;
    let mut converged = true;
    loop {
        let candidate = state.select().filter(|&n| state.alphas[n] < -tol);
        match candidate {
            Some(n) => {
                if flips == flip_budget {
                    converged = false;
                    break;
                }
                state.flip(n);
                flips += 1;
                trajectory.push(state.quad());
            }
            None if !state.all_unflipped() => state.reset(),
            None => break,
        }
    }
    if converged && state.has_improving_flip(tol) {
        converged = false;
    }
    BitFlipRun {
        bits: state.bits,
        flips,
        trajectory,
        converged,
    }
}

pub(crate) fn random_signs(n: usize, seed: u64) -> SignVector {
    let mut rng = rng_for(seed, &[stream::INIT]);
    let bits = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    SignVector::from_bits(bits).expect("entries are +-1")
}

pub(crate) fn gaussian_vector(len: usize, seed: u64, restart: usize) -> DVector<f64> {
    let mut rng = rng_for(seed, &[stream::RESTART, restart as u64]);
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

pub(crate) fn first_start(x: &DataMatrix, cfg: &SolverConfig) -> Result<SignVector> {
    let n = x.samples();
    Ok(match &cfg.init {
        Init::SvSign => sv_sign_init(x.y()),
        Init::Random => random_signs(n, cfg.seed),
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

/// `q = X b / |X b|`.
pub fn normalized_direction(x: &DMatrix<f64>, b: &SignVector) -> Result<DVector<f64>> {
    let xb = x * b.to_dvector();
    let norm = xb.norm();
    if !(norm > 0.0) {
        return Err(Error::Degenerate(
            "X b vanishes, the component cannot be normalized".into(),
        ));
    }
    Ok(xb / norm)
}

/// Leading L1 principal component by bit flipping.
///
/// Start 1 follows `cfg.init`; starts `2..=L` use `sgn(Y^T a)` with `a`
/// standard Gaussian. The start with the largest `|X^T q|_1` wins.
pub fn bit_flip_solve(x: &DataMatrix, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let started = Instant::now();
    let n = x.samples();
    let gram = x.gram();
    let budget = cfg.flip_budget.unwrap_or(n);
    let tol = cfg
        .tol
        .unwrap_or(DEFAULT_TOL_FACTOR * x.y().norm_squared());

    let mut runs = Vec::with_capacity(cfg.restarts);
    let mut finals = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let start = if restart == 0 {
            first_start(x, cfg)?
        } else {
            let a = gaussian_vector(x.rank(), cfg.seed, restart);
            SignVector::sign_of((x.y().tr_mul(&a)).iter())
        };
        let run = bit_flip(&gram, start, budget, tol);
        let q = normalized_direction(x.x(), &run.bits)?;
        let metric = x.x().tr_mul(&q).iter().map(|v| v.abs()).sum::<f64>();
        runs.push(RunTrace {
            flips: run.flips,
            trajectory: run.trajectory,
            converged: run.converged,
            l1_metric: metric,
        });
        finals.push((run.bits, q));
    }

    let winner = pick_winner(runs.iter().map(|r| r.l1_metric));
    let (b, q) = finals.swap_remove(winner);
    let basis = DMatrix::from_column_slice(q.len(), 1, q.as_slice());
    Ok(SolverReport {
        l1_metric: l1_metric(x.x(), &basis),
        objective: quad_metric(x.y(), &b),
        basis,
        signs: SignMatrix::replicate(&b, 1),
        flips: runs[winner].flips,
        converged: runs[winner].converged,
        restart_winner: winner,
        basis_completed: false,
        runs,
        wall_time: started.elapsed(),
    })
}
