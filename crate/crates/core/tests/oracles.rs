//! Checks against independent reference computations: nalgebra for linear
//! algebra, exhaustive sign enumeration for small Lasso problems, and a
//! dense grid for the scalar case.

mod common;

use common::max_abs_diff;
use lassolab::datagen::{lasso_instance, GenSpec, SeededStream};
use lassolab::linalg::{self, sigma_max, DenseMatrix};
use lassolab::pathwise::{eval_path_at, solve_path, PathOptions};
use lassolab::solvers::{solve_cgda, solve_fista, solve_ista, SolverConfig};
use lassolab::verify::{oracle_solve, ORACLE_TOL};
use lassolab::LassoProblem;
use nalgebra::{DMatrix, DVector};

fn to_na(x: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(x.rows(), x.cols(), x.as_slice())
}

fn small_instance(seed: u64, n: usize, p: usize, fraction: f64) -> LassoProblem {
    lasso_instance(&GenSpec::new(n, p, 2.min(p), 0.3, seed), fraction)
        .unwrap()
        .1
}

/// Exhaustive Lasso solve: for every sign pattern, solve the stationarity
/// equations on its support and keep the feasible point of least objective.
fn brute_force(x: &DenseMatrix, y: &[f64], lambda: f64) -> Vec<f64> {
    let (n, p) = (x.rows(), x.cols());
    let xa = to_na(x);
    let yv = DVector::from_column_slice(y);
    let gram = xa.transpose() * &xa;
    let q = xa.transpose() * &yv;
    let nl = n as f64 * lambda;
    let objective = |b: &DVector<f64>| {
        (&yv - &xa * b).norm_squared() / (2.0 * n as f64)
            + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
    };
    let mut best = DVector::zeros(p);
    let mut best_f = objective(&best);
    for code in 0..3usize.pow(p as u32) {
        let mut signs = vec![0.0; p];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = [0.0, 1.0, -1.0][c % 3];
            c /= 3;
        }
        let support: Vec<usize> = (0..p).filter(|&j| signs[j] != 0.0).collect();
        if support.is_empty() {
            continue;
        }
        let k = support.len();
        let gss = DMatrix::from_fn(k, k, |r, s| gram[(support[r], support[s])]);
        let rhs = DVector::from_fn(k, |r, _| q[support[r]] - nl * signs[support[r]]);
        let Some(chol) = gss.cholesky() else { continue };
        let bs = chol.solve(&rhs);
        if (0..k).any(|r| bs[r] * signs[support[r]] <= 0.0) {
            continue;
        }
        let mut b = DVector::zeros(p);
        for (r, &j) in support.iter().enumerate() {
            b[j] = bs[r];
        }
        let corr = &q - &gram * &b;
        if (0..p).any(|j| signs[j] == 0.0 && corr[j].abs() > nl * (1.0 + 1e-12)) {
            continue;
        }
        let f = objective(&b);
        if f < best_f {
            best_f = f;
            best = b;
        }
    }
    best.iter().copied().collect()
}

#[test]
fn sigma_max_matches_symmetric_eigenvalues() {
    for seed in 1..=10u64 {
        let (data, _) = lasso_instance(&GenSpec::new(40, 12, 3, 0.5, seed), 0.1).unwrap();
        let g = data.x.gram();
        let want = to_na(&g).symmetric_eigen().eigenvalues.max();
        let got = sigma_max(&g, 1e-12).unwrap();
        assert!(
            (got - want).abs() <= 1e-8 * want,
            "seed {seed}: {got} vs {want}"
        );
    }
}

#[test]
fn sigma_max_on_diagonal_and_repeated_spectrum() {
    let mut d = DenseMatrix::zeros(4, 4);
    for (i, v) in [0.5, 7.0, 2.0, 7.0].iter().enumerate() {
        d.set(i, i, *v);
    }
    assert_eq!(sigma_max(&d, 1e-12).unwrap(), 7.0);
    let ones = DenseMatrix::from_rows(&vec![vec![1.0; 5]; 5]).unwrap();
    assert!((sigma_max(&ones, 1e-12).unwrap() - 5.0).abs() < 1e-10);
}

#[test]
fn lipschitz_constant_and_objective_from_raw_design() {
    let (data, prob) = lasso_instance(&GenSpec::new(30, 8, 3, 0.5, 4), 0.2).unwrap();
    let xa = to_na(&data.x);
    let n = 30.0;
    let want_l = (xa.transpose() * &xa / n)
        .symmetric_eigen()
        .eigenvalues
        .max();
    assert!((prob.lipschitz() - want_l).abs() <= 1e-9 * want_l);
    let mut stream = SeededStream::new(3);
    for _ in 0..20 {
        let b: Vec<f64> = (0..8).map(|_| stream.normal()).collect();
        let r = DVector::from_column_slice(&data.y) - &xa * DVector::from_column_slice(&b);
        let want = r.norm_squared() / (2.0 * n) + prob.lambda() * linalg::norm1(&b);
        let got = prob.objective(&b).unwrap();
        assert!(
            (got - want).abs() <= 1e-12 * want.abs().max(1.0),
            "{got} vs {want}"
        );
    }
}

#[test]
fn restricted_least_squares_solves_normal_equations() {
    let (data, _) = lasso_instance(&GenSpec::new(25, 6, 2, 0.5, 9), 0.1).unwrap();
    let support = [0, 2, 5];
    let got = linalg::restricted_least_squares(&data.x, &data.y, &support).unwrap();
    let xs = to_na(&data.x.select_columns(&support));
    let want = (xs.transpose() * &xs)
        .cholesky()
        .unwrap()
        .solve(&(xs.transpose() * DVector::from_column_slice(&data.y)));
    assert_eq!(got.len(), 6);
    let on_support: Vec<f64> = support.iter().map(|&j| got[j]).collect();
    assert!(max_abs_diff(&on_support, want.as_slice()) < 1e-10);
    assert!([1, 3, 4].iter().all(|&j| got[j] == 0.0));
}

#[test]
fn every_method_agrees_with_exhaustive_search() {
    let cfg = SolverConfig {
        max_iters: 500_000,
        gap_tol: 1e-12,
        ..Default::default()
    };
    for seed in 1..=12u64 {
        for fraction in [0.05, 0.3, 0.7] {
            let (data, prob) =
                lasso_instance(&GenSpec::new(15, 5, 2, 0.3, seed), fraction).unwrap();
            let want = brute_force(&data.x, &data.y, prob.lambda());
            let oracle = oracle_solve(&prob, ORACLE_TOL).unwrap();
            assert!(
                max_abs_diff(&oracle, &want) < 1e-8,
                "oracle seed {seed} fraction {fraction}"
            );
            let path = solve_path(
                &prob.with_lambda(prob.lambda_max()).unwrap(),
                &PathOptions {
                    min_lambda: prob.lambda(),
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(max_abs_diff(&eval_path_at(&path, prob.lambda()).unwrap(), &want) < 1e-9);
            for t in [
                solve_ista(&prob, None, &cfg).unwrap(),
                solve_fista(&prob, None, &cfg).unwrap(),
                solve_cgda(&prob, None, &cfg).unwrap(),
            ] {
                assert!(
                    max_abs_diff(t.final_beta(), &want) < 1e-5,
                    "{} seed {seed} fraction {fraction}",
                    t.algorithm
                );
            }
        }
    }
}

#[test]
fn scalar_problem_matches_grid_minimum() {
    for seed in 1..=5u64 {
        let prob = small_instance(seed, 20, 1, 0.4);
        let f = |b: f64| prob.objective(&[b]).unwrap();
        let hat = oracle_solve(&prob, ORACLE_TOL).unwrap()[0];
        let (lo, hi) = (hat - 1.0, hat + 1.0);
        let steps = 200_000;
        let grid_min = (0..=steps)
            .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap();
        assert!(
            (grid_min - hat).abs() <= 2.0 / steps as f64,
            "seed {seed}: {grid_min} vs {hat}"
        );
        assert!(f(hat) <= f(grid_min) + 1e-15);
    }
}
