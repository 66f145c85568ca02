//! Exhaustive search for the exact optimum.
//!
//! K = 1 walks the half cube with the first bit pinned to +1. K > 1
//! enumerates tuples of half-cube columns in nondecreasing index order,
//! which covers every sign matrix up to column negations and permutations,
//! neither of which changes `|YB|_*`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::gray::{bits_at, half_cube_size, par_chunks, walk_range};
use crate::error::{Error, Result};
use crate::linalg::{l1_metric, nuclear_norm, procrustes_completed, DataMatrix};
use crate::signs::{SignMatrix, SignVector};

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub best: SignMatrix,
    /// `|Yb|_2` for K = 1, `|YB|_*` otherwise.
    pub best_value: f64,
    pub basis: DMatrix<f64>,
    pub l1_metric: f64,
    pub candidates_searched: u64,
    pub basis_completed: bool,
}

/// Largest N searched by default for a given K.
pub fn oracle_guard(k: usize) -> usize {
    match k {
        1 => 16,
        2 => 10,
        _ => 8,
    }
}

/// Exact optimum with the default size guard.
pub fn exhaustive_oracle(x: &DataMatrix, k: usize) -> Result<OracleResult> {
    exhaustive_oracle_with_guard(x, k, oracle_guard(k))
}

pub fn exhaustive_oracle_with_guard(x: &DataMatrix, k: usize, max_n: usize) -> Result<OracleResult> {
    let n = x.samples();
    if k == 0 || k > x.rank() {
        return Err(Error::Precondition(format!(
            "need 1 <= K <= rank, got K = {k} with rank {}",
            x.rank()
        )));
    }
    if n > max_n || n > 62 {
        return Err(Error::GuardExceeded { n, max: max_n.min(62), k });
    }
    let y = x.y();
    let (best, searched) = if k == 1 {
        (SignMatrix::replicate(&best_single(y), 1), half_cube_size(n))
    } else {
        best_tuple(y, k)
    };
    let yb = y * best.to_dmatrix();
    let best_value = if k == 1 { yb.norm() } else { nuclear_norm(&yb)? };
    let polar = procrustes_completed(&(x.x() * best.to_dmatrix()))?;
    Ok(OracleResult {
        l1_metric: l1_metric(x.x(), &polar.q),
        best,
        best_value,
        basis: polar.q,
        candidates_searched: searched,
        basis_completed: polar.completed,
    })
}

fn best_single(y: &DMatrix<f64>) -> SignVector {
    let n = y.ncols();
    let per_chunk = par_chunks(n, |lo, hi| {
        let mut best = (f64::NEG_INFINITY, lo);
        walk_range(
            n,
            lo,
            hi,
            |bits| y * DVector::from_column_slice(bits),
            |yb, bits, p| yb.axpy(-2.0 * bits[p], &y.column(p), 1.0),
            |yb, _, index| {
                let v = yb.norm_squared();
                if v > best.0 {
                    best = (v, index);
                }
            },
        );
        best
    });
    let index = reduce_ordered(per_chunk);
    SignVector::sign_of(bits_at(n, index).iter())
}

/// Maximum over chunk maxima, earliest chunk on ties.
fn reduce_ordered(per_chunk: Vec<(f64, u64)>) -> u64 {
    let mut best = (f64::NEG_INFINITY, 0);
    for c in per_chunk {
        if c.0 > best.0 {
            best = c;
        }
    }
    best.1
}

fn best_tuple(y: &DMatrix<f64>, k: usize) -> (SignMatrix, u64) {
    let n = y.ncols();
    let h = half_cube_size(n) as usize;
    // Y b for every half-cube point, in index order.
    let columns: Vec<Vec<DVector<f64>>> = par_chunks(n, |lo, hi| {
        let mut out = Vec::with_capacity((hi - lo) as usize);
        walk_range(
            n,
            lo,
            hi,
            |bits| y * DVector::from_column_slice(bits),
            |yb, bits, p| yb.axpy(-2.0 * bits[p], &y.column(p), 1.0),
            |yb, _, _| out.push(yb.clone()),
        );
        out
    });
    let cols: Vec<DVector<f64>> = columns.into_iter().flatten().collect();
    let gram = ColumnGram {
        norms2: cols.iter().map(|c| c.norm_squared()).collect(),
        cols,
    };

    let per_first: Vec<(f64, Vec<usize>, u64)> = (0..h)
        .into_par_iter()
        .map(|first| best_with_first(&gram, k, first))
        .collect();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut searched = 0u64;
    for (value, tuple, count) in per_first {
        searched += count;
        if value > best.0 {
            best = (value, tuple);
        }
    }
    let columns: Vec<SignVector> = best
        .1
        .iter()
        .map(|&i| SignVector::sign_of(bits_at(n, i as u64).iter()))
        .collect();
    let b = SignMatrix::from_columns(&columns).expect("columns share length N");
    (b, searched)
}

/// Best nondecreasing tuple `first <= i_2 <= ... <= i_K`.
fn best_with_first(gram: &ColumnGram, k: usize, first: usize) -> (f64, Vec<usize>, u64) {
    let h = gram.cols.len();
    let mut tuple = vec![first; k];
    let mut best = (f64::NEG_INFINITY, tuple.clone());
    let mut count = 0u64;
    loop {
        count += 1;
        let v = tuple_nuclear(gram, &tuple);
        if v > best.0 {
            best = (v, tuple.clone());
        }
        // advance the tail positions like an odometer with nondecreasing digits
        let mut pos = k - 1;
        loop {
            if pos == 0 {
                return (best.0, best.1, count);
            }
            if tuple[pos] + 1 < h {
                tuple[pos] += 1;
                let v = tuple[pos];
                for t in tuple.iter_mut().skip(pos + 1) {
                    *t = v;
                }
                break;
            }
            pos -= 1;
        }
    }
}

/// Gram entries of the candidate columns, computed on demand.
struct ColumnGram {
    cols: Vec<DVector<f64>>,
    norms2: Vec<f64>,
}

impl ColumnGram {
    fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.norms2[i]
        } else {
            self.cols[i].dot(&self.cols[j])
        }
    }
}

/// `|YB|_*` from the Gram entries of the selected columns.
fn tuple_nuclear(gram: &ColumnGram, tuple: &[usize]) -> f64 {
    if let [i, j] = *tuple {
        let (a, b, c) = (gram.norms2[i], gram.norms2[j], gram.entry(i, j));
        // sigma_1 + sigma_2 = sqrt(trace + 2 sqrt(det)) for the 2 x 2 Gram
        return (a + b + 2.0 * (a * b - c * c).max(0.0).sqrt()).max(0.0).sqrt();
    }
    let g = DMatrix::from_fn(tuple.len(), tuple.len(), |r, s| gram.entry(tuple[r], tuple[s]));
    g.symmetric_eigenvalues().iter().map(|&l| l.max(0.0).sqrt()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_for(seed, &[]);
        DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    }

    /// Every sign matrix in {+-1}^{N x K}, no symmetry reduction.
    fn brute_force(x: &DataMatrix, k: usize) -> f64 {
        let n = x.samples();
        let mut best = f64::NEG_INFINITY;
        for code in 0u64..(1 << (n * k)) {
            let b = DMatrix::from_fn(n, k, |r, c| {
                if (code >> (c * n + r)) & 1 == 1 { -1.0 } else { 1.0 }
            });
            let xb = x.x() * b;
            let v = if k == 1 { xb.norm() } else { nuclear_norm(&xb).unwrap() };
            best = best.max(v);
        }
        best
    }

    #[test]
    fn one_dimensional_closed_form() {
        let x = DataMatrix::from_row_major(1, 3, &[1.0, -2.0, 3.0]).unwrap();
        let r = exhaustive_oracle(&x, 1).unwrap();
        assert!((r.best_value - 6.0).abs() < 1e-12);
        assert_eq!(r.best.column(0).bits(), &[1, -1, 1]);
        assert!((r.l1_metric - 6.0).abs() < 1e-12);
        assert_eq!(r.candidates_searched, 4);
    }

    #[test]
    fn identity_all_candidates_tie() {
        let x = DataMatrix::new(DMatrix::identity(2, 2)).unwrap();
        let r = exhaustive_oracle(&x, 1).unwrap();
        assert!((r.best_value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matches_unpruned_enumeration() {
        for seed in 0..6 {
            let x = DataMatrix::new(gaussian(3, 5, 100 + seed)).unwrap();
            for k in 1..=3 {
                let r = exhaustive_oracle(&x, k).unwrap();
                let brute = brute_force(&x, k);
                assert!((r.best_value - brute).abs() < 1e-9, "k={k}: {} vs {brute}", r.best_value);
            }
        }
        let x = DataMatrix::new(gaussian(2, 6, 7)).unwrap();
        let r = exhaustive_oracle(&x, 2).unwrap();
        assert!((r.best_value - brute_force(&x, 2)).abs() < 1e-9);
    }

    #[test]
    fn beats_random_directions() {
        let x = DataMatrix::new(gaussian(4, 10, 11)).unwrap();
        let r = exhaustive_oracle(&x, 1).unwrap();
        let mut rng = rng_for(12, &[]);
        for _ in 0..1000 {
            let q = DVector::<f64>::from_fn(4, |_, _| StandardNormal.sample(&mut rng)).normalize();
            let m: f64 = x.x().tr_mul(&q).iter().map(|v| v.abs()).sum();
            assert!(r.l1_metric >= m - 1e-12);
        }
    }

    #[test]
    fn k1_value_equals_l1_metric() {
        let x = DataMatrix::new(gaussian(3, 9, 5)).unwrap();
        let r = exhaustive_oracle(&x, 1).unwrap();
        assert!((r.best_value - r.l1_metric).abs() < 1e-9);
    }

    #[test]
    fn candidate_counts() {
        let x = DataMatrix::new(gaussian(3, 6, 1)).unwrap();
        // 32 columns, multisets of size 2: 32 * 33 / 2
        assert_eq!(exhaustive_oracle(&x, 2).unwrap().candidates_searched, 528);
        assert_eq!(exhaustive_oracle(&x, 3).unwrap().candidates_searched, 32 * 33 * 34 / 6);
    }

    #[test]
    fn guard_refuses_large_n() {
        let x = DataMatrix::new(gaussian(2, 11, 2)).unwrap();
        assert!(matches!(
            exhaustive_oracle(&x, 2),
            Err(Error::GuardExceeded { n: 11, max: 10, k: 2 })
        ));
        assert!(exhaustive_oracle_with_guard(&x, 2, 11).is_ok());
    }

    #[test]
    fn identity_two_components() {
        let x = DataMatrix::new(DMatrix::identity(2, 2)).unwrap();
        let r = exhaustive_oracle(&x, 2).unwrap();
        assert!((r.best_value - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((r.l1_metric - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}
