use l1pca::baselines::exhaustive_oracle;
use l1pca::linalg::l1_metric;
use l1pca::nalgebra::DMatrix;
use l1pca::{solve, DataMatrix, Solver, SolverConfig};
use proptest::prelude::*;

fn matrix(max_dim: usize, max_samples: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max_dim, 1..=max_samples).prop_flat_map(|(d, n)| {
        prop::collection::vec(-10.0f64..10.0, d * n).prop_map(move |v| DMatrix::from_vec(d, n, v))
    })
}

fn nonzero(x: &DMatrix<f64>) -> bool {
    x.norm() > 1e-3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k1_metric_is_bounded(x in matrix(6, 20)) {
        prop_assume!(nonzero(&x));
        let data = DataMatrix::new(x.clone()).unwrap();
        let r = solve(&data, 1, Solver::L1bf, &SolverConfig::default()).unwrap();
        let n = x.ncols() as f64;
        let sigma = data.svd().sigma[0];
        prop_assert!(r.converged);
        prop_assert!(r.l1_metric >= x.norm() * (1.0 - 1e-12));
        prop_assert!(r.l1_metric <= n.sqrt() * sigma * (1.0 + 1e-12));
        prop_assert!((r.basis.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_of_data_does_not_matter(x in matrix(5, 12), k in 1usize..=3) {
        prop_assume!(nonzero(&x));
        let a = DataMatrix::new(x.clone()).unwrap();
        prop_assume!(k <= a.rank());
        let b = DataMatrix::new(-x).unwrap();
        let cfg = SolverConfig::default().with_restarts(2);
        let ra = solve(&a, k, Solver::L1bf, &cfg).unwrap();
        let rb = solve(&b, k, Solver::L1bf, &cfg).unwrap();
        let scale = ra.l1_metric.max(1.0);
        prop_assert!((ra.l1_metric - rb.l1_metric).abs() <= 1e-9 * scale);
    }

    #[test]
    fn reported_metric_matches_basis(x in matrix(5, 12), k in 1usize..=3, solver in 0usize..3) {
        prop_assume!(nonzero(&x));
        let data = DataMatrix::new(x.clone()).unwrap();
        prop_assume!(k <= data.rank());
        let solver = [Solver::L1bf, Solver::Fp, Solver::Ao][solver];
        let r = solve(&data, k, solver, &SolverConfig::default()).unwrap();
        let q = &r.basis;
        prop_assert!((q.tr_mul(q) - DMatrix::identity(k, k)).amax() < 1e-9);
        let direct = l1_metric(&x, q);
        prop_assert!((r.l1_metric - direct).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn solvers_never_beat_the_oracle(x in matrix(4, 9), k in 1usize..=2) {
        prop_assume!(nonzero(&x));
        let data = DataMatrix::new(x).unwrap();
        prop_assume!(k <= data.rank());
        let best = exhaustive_oracle(&data, k).unwrap().l1_metric;
        for solver in [Solver::L1bf, Solver::Fp, Solver::Ao] {
            let r = solve(&data, k, solver, &SolverConfig::default().with_restarts(3)).unwrap();
            prop_assert!(r.l1_metric <= best * (1.0 + 1e-9), "{solver}");
        }
    }

    #[test]
    fn column_order_does_not_change_the_oracle(x in matrix(3, 8), k in 1usize..=2) {
        prop_assume!(nonzero(&x));
        let data = DataMatrix::new(x.clone()).unwrap();
        prop_assume!(k <= data.rank());
        let n = x.ncols();
        let reversed = DMatrix::from_fn(x.nrows(), n, |r, c| x[(r, n - 1 - c)]);
        let a = exhaustive_oracle(&data, k).unwrap().l1_metric;
        let b = exhaustive_oracle(&DataMatrix::new(reversed).unwrap(), k).unwrap().l1_metric;
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }
}
