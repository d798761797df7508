use super::{start_point, Recorder, SolverConfig, SweepOrder};
use crate::error::{Error, Result};
use crate::problem::{shrink, LassoProblem};
use crate::trace::{Algorithm, IterateTrace};

/// Cyclic coordinate descent. Each coordinate is set to its exact 1-D
/// minimizer
///
/// ```text
/// b_j = S((X'y)_j - sum_{l != j} (X'X)_{jl} b_l, n lambda) / (X'X)_{jj}
/// ```
///
/// and one trace record is produced per full sweep over `j = 1..p`.
pub fn solve_cgda(
    problem: &LassoProblem,
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<IterateTrace> {
    let gram = problem.gram();
    let p = problem.p();
    if let Some(j) = (0..p).find(|&j| !(gram.get(j, j) > 0.0)) {
        return Err(Error::ZeroColumn(j));
    }
    let mut beta = start_point(problem, x0)?;
    let level = problem.n() as f64 * problem.lambda();
    let xty = problem.xty();
    let mut rec = Recorder::new(problem, cfg, Algorithm::Cgda, &beta, None)?;

    let partial = |b: &[f64], j: usize| -> f64 {
        let row = gram.row(j);
        let mut s = xty[j];
        for (l, (g, bl)) in row.iter().zip(b).enumerate() {
            if l != j {
                s -= g * bl;
            }
        }
        s
    };

    for k in 1..=cfg.max_iters {
        match cfg.sweep {
            SweepOrder::GaussSeidel => {
                for j in 0..p {
                    beta[j] = shrink(partial(&beta, j), level) / gram.get(j, j);
                }
            }
            SweepOrder::Jacobi => {
                beta = (0..p)
                    .map(|j| shrink(partial(&beta, j), level) / gram.get(j, j))
                    .collect();
            }
        }
        if rec.observe(k, &beta, None)? {
            break;
        }
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::trace::SolveStatus;

    #[test]
    fn single_coordinate_solved_in_one_sweep() {
        let x = DenseMatrix::new(3, 1, vec![1.0, 2.0, -1.0]).unwrap();
        let y = vec![2.0, 3.0, 0.5];
        // X'y = 7.5, X'X = 6, n lambda = 1.5
        let prob = LassoProblem::new(x, y, 0.5).unwrap();
        let t = solve_cgda(&prob, None, &SolverConfig::default()).unwrap();
        assert_eq!(t.status, SolveStatus::Converged(1));
        assert_eq!(t.final_beta(), &[(7.5 - 1.5) / 6.0]);
    }

    #[test]
    fn zero_column_is_named() {
        let x = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let prob = LassoProblem::new(x, vec![1.0, 1.0], 0.1).unwrap();
        assert!(matches!(
            solve_cgda(&prob, None, &SolverConfig::default()),
            Err(Error::ZeroColumn(1))
        ));
    }

    #[test]
    fn orthogonal_design_closed_form() {
        // Columns orthogonal with different norms: X'X = diag(4, 9).
        let x = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0], vec![0.0, 0.0]]).unwrap();
        let y = vec![5.0, -4.0, 1.0];
        let prob = LassoProblem::new(x, y, 0.5).unwrap();
        let t = solve_cgda(&prob, None, &SolverConfig::default()).unwrap();
        // (X'y) = (10, -12), n lambda = 1.5
        let want = [(10.0 - 1.5) / 4.0, (-12.0 + 1.5) / 9.0];
        assert_eq!(t.records[1].beta, want);
    }

    #[test]
    fn jacobi_matches_gauss_seidel_on_orthogonal_design() {
        let x = DenseMatrix::identity(3);
        let prob = LassoProblem::new(x, vec![1.0, -2.0, 0.1], 0.1).unwrap();
        let gs = solve_cgda(&prob, None, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig {
            sweep: SweepOrder::Jacobi,
            ..Default::default()
        };
        let jac = solve_cgda(&prob, None, &cfg).unwrap();
        assert_eq!(gs.final_beta(), jac.final_beta());
    }
}
