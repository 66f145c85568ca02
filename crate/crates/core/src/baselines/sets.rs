//! Exhaustive classification of {+-1}^N into the fixed-point set `Phi`, the
//! bit-flipping convergence set `Omega` and the optimal set `B`.

use nalgebra::{DMatrix, DVector};

use super::gray::{bits_at, par_chunks, walk_range};
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;
use crate::signs::SignVector;

pub const MAX_SET_ENUMERATION_N: usize = 20;

/// Relative tolerance, against `|Y|_F^2`, of the `Omega` test and of ties
/// in `B`.
const SET_TOL_FACTOR: f64 = 1e-12;

/// Members are stored with a leading +1; the `*_count` methods report
/// cardinalities of the full sets, counting `b` and `-b`.
#[derive(Clone, Debug)]
pub struct ConvergenceSets {
    pub n: usize,
    pub phi: Vec<SignVector>,
    pub omega: Vec<SignVector>,
    pub optimal: Vec<SignVector>,
    pub optimal_value: f64,
}

impl ConvergenceSets {
    pub fn phi_count(&self) -> usize {
        2 * self.phi.len()
    }

    pub fn omega_count(&self) -> usize {
        2 * self.omega.len()
    }

    pub fn optimal_count(&self) -> usize {
        2 * self.optimal.len()
    }

    /// Members of `B` missing from `Omega` plus members of `Omega` missing
    /// from `Phi`.
    pub fn inclusion_violations(&self) -> usize {
        let missing = |inner: &[SignVector], outer: &[SignVector]| {
            inner.iter().filter(|b| outer.binary_search(b).is_err()).count()
        };
        missing(&self.optimal, &self.omega) + missing(&self.omega, &self.phi)
    }

    pub fn contains_omega(&self, b: &SignVector) -> bool {
        self.omega.binary_search(&b.canonical()).is_ok()
    }
}

#[derive(Default)]
struct ChunkSets {
    phi: Vec<u64>,
    omega: Vec<u64>,
    values: Vec<f64>,
}

pub fn enumerate_sets(x: &DataMatrix) -> Result<ConvergenceSets> {
    let n = x.samples();
    if n > MAX_SET_ENUMERATION_N {
        return Err(Error::GuardExceeded {
            n,
            max: MAX_SET_ENUMERATION_N,
            k: 1,
        });
    }
    let gram = x.gram();
    let tol = SET_TOL_FACTOR * gram.trace();
    let chunks = par_chunks(n, |lo, hi| classify_range(&gram, tol, lo, hi));

    let values: Vec<f64> = chunks.iter().flat_map(|c| c.values.iter().copied()).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let to_signs = |indices: Vec<u64>| {
        let mut v: Vec<SignVector> = indices
            .into_iter()
            .map(|i| SignVector::sign_of(bits_at(n, i).iter()))
            .collect();
        v.sort();
        v
    };
    let optimal = (0..values.len() as u64)
        .filter(|&i| values[i as usize] >= best - tol)
        .collect();
    let (phi, omega): (Vec<_>, Vec<_>) = chunks.into_iter().map(|c| (c.phi, c.omega)).unzip();
    Ok(ConvergenceSets {
        n,
        phi: to_signs(phi.concat()),
        omega: to_signs(omega.concat()),
        optimal: to_signs(optimal),
        optimal_value: best.max(0.0).sqrt(),
    })
}

fn classify_range(gram: &DMatrix<f64>, tol: f64, lo: u64, hi: u64) -> ChunkSets {
    let n = gram.nrows();
    let mut out = ChunkSets::default();
    walk_range(
        n,
        lo,
        hi,
        |bits| gram * DVector::from_column_slice(bits),
        |gb, bits, p| gb.axpy(-2.0 * bits[p], &gram.column(p), 1.0),
        |gb, bits, index| {
            let mut fixed = true;
            let mut converged = true;
            let mut value = 0.0;
            for i in 0..n {
                let s = bits[i] * gb[i];
                value += s;
                fixed &= if gb[i] == 0.0 { bits[i] > 0.0 } else { s > 0.0 };
                converged &= s >= gram[(i, i)] - tol;
            }
            if fixed {
                out.phi.push(index);
            }
            if converged {
                out.omega.push(index);
            }
            out.values.push(value);
        },
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Init, SolverConfig};
    use crate::rng::rng_for;
    use crate::solver_k1::bit_flip_solve;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_for(seed, &[]);
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    }

    /// Direct membership tests on every point of the full cube.
    fn direct_counts(x: &DataMatrix) -> (usize, usize, usize) {
        let n = x.samples();
        let g = x.gram();
        let tol = SET_TOL_FACTOR * g.trace();
        let all: Vec<_> = (0u32..1 << n)
            .map(|code| DVector::from_fn(n, |i, _| if (code >> i) & 1 == 1 { -1.0 } else { 1.0 }))
            .collect();
        let best = all.iter().map(|b| b.dot(&(&g * b))).fold(f64::NEG_INFINITY, f64::max);
        let (mut phi, mut omega, mut opt) = (0, 0, 0);
        for b in &all {
            let gb = &g * b;
            if SignVector::sign_of(gb.iter()).to_dvector() == *b {
                phi += 1;
            }
            if (0..n).all(|i| b[i] * gb[i] >= g[(i, i)] - tol) {
                omega += 1;
            }
            if b.dot(&gb) >= best - tol {
                opt += 1;
            }
        }
        (phi, omega, opt)
    }

    #[test]
    fn matches_direct_classification() {
        for seed in 0..20 {
            let x = DataMatrix::new(gaussian(2, 7, seed)).unwrap();
            let sets = enumerate_sets(&x).unwrap();
            assert_eq!(
                (sets.phi_count(), sets.omega_count(), sets.optimal_count()),
                direct_counts(&x)
            );
            assert_eq!(sets.inclusion_violations(), 0);
            assert!(sets.optimal_count() >= 2);
        }
    }

    #[test]
    fn bit_flip_results_lie_in_omega() {
        for seed in 0..30 {
            let x = DataMatrix::new(gaussian(3, 9, 50 + seed)).unwrap();
            let sets = enumerate_sets(&x).unwrap();
            for init in [Init::SvSign, Init::Random] {
                let cfg = SolverConfig::default().with_init(init).with_seed(seed);
                let r = bit_flip_solve(&x, &cfg).unwrap();
                assert!(r.converged);
                assert!(sets.contains_omega(&r.b()));
            }
        }
    }

    #[test]
    fn optimal_value_matches_oracle() {
        let x = DataMatrix::new(gaussian(3, 10, 9)).unwrap();
        let sets = enumerate_sets(&x).unwrap();
        let oracle = crate::baselines::exhaustive_oracle(&x, 1).unwrap();
        assert!((sets.optimal_value - oracle.best_value).abs() < 1e-9);
        assert!(sets.optimal.contains(&oracle.best.column(0)));
    }

    #[test]
    fn guard() {
        let x = DataMatrix::new(gaussian(2, 21, 1)).unwrap();
        assert!(matches!(enumerate_sets(&x), Err(Error::GuardExceeded { .. })));
    }
}
