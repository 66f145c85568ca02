//! Eigensystem of a diagonal matrix plus a symmetric rank-1 term,
//! `diag(p) + rho z z^T`, via the secular equation.
//!
//! Components with negligible `z` entries and (numerically) repeated diagonal
//! entries are deflated first. Each remaining eigenvalue is found by
//! safeguarded Newton iteration inside its interlacing interval, in a
//! coordinate shifted to the nearer pole so that the gaps `d_i - lambda` keep
//! full relative accuracy. Eigenvectors use the Gu-Eisenstat recomputation of
//! the update vector, which keeps them orthogonal even for clustered roots.

use nalgebra::DMatrix;

/// Eigenvalues in nonincreasing order; `eigenvectors` (when requested) holds
/// the matching unit eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigUpdateResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
}

const DEFLATION_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// Eigen-decompose `diag(p) + rho * z z^T`.
///
/// `p` need not be sorted. Any sign of `rho` is accepted; a negative update
/// is solved as the positive update of `-diag(p)`.
pub fn rank1_eig_update(p: &[f64], z: &[f64], rho: f64, want_vectors: bool) -> EigUpdateResult {
    assert_eq!(p.len(), z.len(), "diagonal and update vector lengths differ");
    let k = p.len();
    if rho == 0.0 || z.iter().all(|&v| v == 0.0) {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
        let eigenvalues = order.iter().map(|&i| p[i]).collect();
        let eigenvectors = want_vectors.then(|| {
            let mut v = DMatrix::zeros(k, k);
            for (j, &i) in order.iter().enumerate() {
                v[(i, j)] = 1.0;
            }
            v
        });
        return EigUpdateResult {
            eigenvalues,
            eigenvectors,
        };
    }

    let scale = rho.abs().sqrt();
    let w: Vec<f64> = z.iter().map(|v| v * scale).collect();
    if rho > 0.0 {
        let (mut values, vectors) = solve_ascending(p, &w, want_vectors);
        values.reverse();
        EigUpdateResult {
            eigenvalues: values,
            eigenvectors: vectors.map(|v| reverse_columns(&v)),
        }
    } else {
        let neg: Vec<f64> = p.iter().map(|v| -v).collect();
        let (values, vectors) = solve_ascending(&neg, &w, want_vectors);
        EigUpdateResult {
            eigenvalues: values.into_iter().map(|v| -v).collect(),
            eigenvectors: vectors,
        }
    }
}

fn reverse_columns(v: &DMatrix<f64>) -> DMatrix<f64> {
    let n = v.ncols();
    DMatrix::from_fn(v.nrows(), n, |i, j| v[(i, n - 1 - j)])
}

/// A root stored relative to the pole it was computed from.
#[derive(Clone, Copy)]
struct Root {
    origin: usize,
    tau: f64,
}

/// Eigensystem of `diag(d) + w w^T`, eigenvalues ascending.
fn solve_ascending(d: &[f64], w: &[f64], want_vectors: bool) -> (Vec<f64>, Option<DMatrix<f64>>) {
    let k = d.len();
    let mut perm: Vec<usize> = (0..k).collect();
    perm.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let ds: Vec<f64> = perm.iter().map(|&i| d[i]).collect();
    let mut ws: Vec<f64> = perm.iter().map(|&i| w[i]).collect();

    let wnorm2: f64 = ws.iter().map(|v| v * v).sum();
    let dmax = ds.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let tol = DEFLATION_TOL * dmax.max(wnorm2);

    // Columns of `basis` are the current coordinate directions, expressed in
    // the sorted frame; deflation rotations act on them.
    let mut basis = DMatrix::<f64>::identity(k, k);
    let mut deflated: Vec<usize> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    for i in 0..k {
        if ws[i].abs() <= tol {
            deflated.push(i);
            continue;
        }
        if let Some(&j) = active.last() {
            if ds[i] - ds[j] <= tol {
                // rotate w_j into w_i; direction j decouples with eigenvalue d_j
                let r = ws[i].hypot(ws[j]);
                let (c, s) = (ws[i] / r, ws[j] / r);
                if want_vectors {
                    let bj = basis.column(j).into_owned();
                    let bi = basis.column(i).into_owned();
                    basis.set_column(j, &(&bj * c - &bi * s));
                    basis.set_column(i, &(&bj * s + &bi * c));
                }
                ws[i] = r;
                ws[j] = 0.0;
                active.pop();
                deflated.push(j);
            }
        }
        active.push(i);
    }

    let ad: Vec<f64> = active.iter().map(|&i| ds[i]).collect();
    let aw: Vec<f64> = active.iter().map(|&i| ws[i]).collect();
    let roots = secular_roots(&ad, &aw);

    let mut pairs: Vec<(f64, Option<Vec<f64>>)> = Vec::with_capacity(k);
    for &i in &deflated {
        let vec = want_vectors.then(|| basis.column(i).iter().copied().collect());
        pairs.push((ds[i], vec));
    }

    let m = active.len();
    let what = if want_vectors && m > 0 {
        Some(recompute_update(&ad, &aw, &roots))
    } else {
        None
    };
    for (j, root) in roots.iter().enumerate() {
        let lambda = ad[root.origin] + root.tau;
        let vec = what.as_ref().map(|what| {
            let mut u: Vec<f64> = (0..m)
                .map(|i| what[i] / ((ad[i] - ad[root.origin]) - root.tau))
                .collect();
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            u.iter_mut().for_each(|v| *v /= norm);
            let mut full = vec![0.0; k];
            for (ui, &col) in u.iter().zip(&active) {
                for (f, b) in full.iter_mut().zip(basis.column(col).iter()) {
                    *f += ui * b;
                }
            }
            full
        });
        debug_assert!(j < m);
        pairs.push((lambda, vec));
    }

    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let vectors = want_vectors.then(|| {
        let mut out = DMatrix::zeros(k, k);
        for (j, (_, vec)) in pairs.iter().enumerate() {
            let vec = vec.as_ref().expect("vectors were requested");
            for (s, &orig) in perm.iter().enumerate() {
                out[(orig, j)] = vec[s];
            }
        }
        out
    });
    (values, vectors)
}

/// Roots of `1 + sum_i w_i^2 / (d_i - lambda)` for strictly increasing `d`
/// and nonzero `w`; root `j` lies in `(d_j, d_{j+1})`, the last one in
/// `(d_m, d_m + |w|^2)`.
fn secular_roots(d: &[f64], w: &[f64]) -> Vec<Root> {
    let m = d.len();
    let w2: Vec<f64> = w.iter().map(|v| v * v).collect();
    let wnorm2: f64 = w2.iter().sum();
    let secular = |origin: usize, tau: f64| -> (f64, f64) {
        let mut f = 1.0;
        let mut df = 0.0;
        for i in 0..m {
            let gap = (d[i] - d[origin]) - tau;
            let t = w2[i] / gap;
            f += t;
            df += t / gap;
        }
        (f, df)
    };

    (0..m)
        .map(|j| {
            let last = j + 1 == m;
            let upper_gap = if last { wnorm2 } else { d[j + 1] - d[j] };
            let (origin, mut lo, mut hi) = if last {
                (j, 0.0, upper_gap)
            } else {
                let (fmid, _) = secular(j, upper_gap / 2.0);
                if fmid >= 0.0 {
                    (j, 0.0, upper_gap / 2.0)
                } else {
                    (j + 1, -upper_gap / 2.0, 0.0)
                }
            };
            let mut tau = 0.5 * (lo + hi);
            for _ in 0..MAX_ITER {
                let (f, df) = secular(origin, tau);
                if f == 0.0 {
                    break;
                }
                if f < 0.0 {
                    lo = tau;
                } else {
                    hi = tau;
                }
                let mut next = tau - f / df;
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                let span = f64::EPSILON * next.abs().max(f64::MIN_POSITIVE);
                let done = (next - tau).abs() <= 2.0 * span || hi - lo <= 4.0 * span;
                tau = next;
                if done {
                    break;
                }
            }
            Root { origin, tau }
        })
        .collect()
}

/// Update vector consistent with the computed roots (Gu-Eisenstat).
fn recompute_update(d: &[f64], w: &[f64], roots: &[Root]) -> Vec<f64> {
    let m = d.len();
    (0..m)
        .map(|i| {
            let gap_to_root = |j: usize| (d[roots[j].origin] - d[i]) + roots[j].tau;
            let mut prod = gap_to_root(i);
            for j in (0..m).filter(|&j| j != i) {
                prod *= gap_to_root(j) / (d[j] - d[i]);
            }
            prod.max(0.0).sqrt().copysign(w[i])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    /// Dense symmetric eigensolver on the explicitly formed matrix.
    fn dense_oracle(p: &[f64], z: &[f64], rho: f64) -> Vec<f64> {
        let k = p.len();
        let m = DMatrix::from_fn(k, k, |i, j| {
            rho * z[i] * z[j] + if i == j { p[i] } else { 0.0 }
        });
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    fn check_against_dense(p: &[f64], z: &[f64], rho: f64, tol: f64) {
        let res = rank1_eig_update(p, z, rho, true);
        let expected = dense_oracle(p, z, rho);
        for (a, b) in res.eigenvalues.iter().zip(&expected) {
            assert!((a - b).abs() <= tol, "{:?} vs {:?}", res.eigenvalues, expected);
        }
        let k = p.len();
        let zmat = res.eigenvectors.unwrap();
        let m = DMatrix::from_fn(k, k, |i, j| {
            rho * z[i] * z[j] + if i == j { p[i] } else { 0.0 }
        });
        let recon = &zmat * DMatrix::from_diagonal(&res.eigenvalues.clone().into()) * zmat.transpose();
        let scale = 1.0 + m.norm();
        assert!((recon - &m).norm() <= tol * scale * 10.0);
        assert!((zmat.tr_mul(&zmat) - DMatrix::identity(k, k)).norm() <= 1e-10);
    }

    #[test]
    fn zero_update_returns_input() {
        let r = rank1_eig_update(&[4.0, 1.0], &[0.0, 0.0], 1.0, true);
        assert_eq!(r.eigenvalues, vec![4.0, 1.0]);
        assert_eq!(r.eigenvectors.unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn axis_aligned_update() {
        let r = rank1_eig_update(&[4.0, 1.0], &[1.0, 0.0], 1.0, false);
        assert!((r.eigenvalues[0] - 5.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_update_matches_dense() {
        let z = [1.0 / 3f64.sqrt(); 3];
        check_against_dense(&[3.0, 2.0, 1.0], &z, 2.0, 1e-10);
    }

    #[test]
    fn negative_updates_match_dense() {
        check_against_dense(&[3.0, 2.0, 1.0], &[0.3, -0.8, 0.5], -1.5, 1e-10);
        check_against_dense(&[9.0, 0.0], &[2.0, 1.0], -0.7, 1e-10);
    }

    #[test]
    fn repeated_and_zero_entries_deflate() {
        check_against_dense(&[2.0, 2.0, 2.0, 0.0], &[1.0, 1.0, 0.0, 0.5], 1.0, 1e-10);
        check_against_dense(&[0.0, 0.0], &[1.0, -1.0], 3.0, 1e-10);
        check_against_dense(&[5.0, 3.0, 5.0], &[0.2, 0.0, -0.4], 1.0, 1e-10);
    }

    #[test]
    fn clustered_roots_keep_orthogonal_vectors() {
        let p = [1.0, 1.0 + 1e-9, 1.0 + 2e-9, 4.0];
        check_against_dense(&p, &[1e-3, 1e-3, 1e-3, 1.0], 1.0, 1e-10);
    }

    #[test]
    fn random_instances_match_dense() {
        let mut rng = rng_for(99, &[]);
        for k in 1..=6 {
            for _ in 0..50 {
                let p: Vec<f64> = (0..k)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        g * g
                    })
                    .collect();
                let z: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
                let rho: f64 = StandardNormal.sample(&mut rng);
                check_against_dense(&p, &z, rho, 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn interlacing_and_trace(
            p in prop::collection::vec(0.0f64..10.0, 1..6),
            seed in any::<u64>(),
            rho in 0.01f64..5.0,
        ) {
            let mut rng = rng_for(seed, &[]);
            let z: Vec<f64> = p.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
            let r = rank1_eig_update(&p, &z, rho, false);
            let mut sorted = p.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let z2: f64 = z.iter().map(|v| v * v).sum();
            let tol = 1e-10 * (1.0 + sorted[0] + rho * z2);
            // lambda_1 >= p_1 >= lambda_2 >= p_2 >= ...
            for i in 0..p.len() {
                prop_assert!(r.eigenvalues[i] >= sorted[i] - tol);
                if i + 1 < p.len() {
                    prop_assert!(r.eigenvalues[i + 1] <= sorted[i] + tol);
                }
            }
            let trace: f64 = r.eigenvalues.iter().sum();
            prop_assert!((trace - (p.iter().sum::<f64>() + rho * z2)).abs() <= tol);
        }
    }
}
