use super::homotopy::{solve_path, PathMode, PathOptions};
use super::{eval_path_at, PathStatus};
use crate::datagen::SeededStream;
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::problem::LassoProblem;
use crate::verify::oracle_solve;

pub const DEFAULT_BETAS: [f64; 3] = [200.0, 100.0, 1.0];

/// Noiseless design with two orthonormal leading columns and every later
/// column a mix `a_j X_1 + (1 - a_j) X_2 + sqrt(1 - a_j^2 - (1 - a_j)^2) Z_j`
/// of them and a private orthonormal direction `Z_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterExample {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    /// `a_j` for columns `3..=p` (1-based).
    pub alphas: Vec<f64>,
    pub betas: [f64; 3],
    /// 0-based, always `[0, 1, 2]`.
    pub true_support: Vec<usize>,
}

impl CounterExample {
    pub fn problem(&self, lambda: f64) -> Result<LassoProblem> {
        LassoProblem::new(self.x.clone(), self.y.clone(), lambda)
    }

    pub fn beta_star(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.x.cols()];
        b[..3].copy_from_slice(&self.betas);
        b
    }

    /// `X_{S^c}' X_S (X_S'X_S)^{-1} (1, 1)'` for `S = {1, 2}`.
    pub fn leading_pair_rhs(&self) -> Result<Vec<f64>> {
        let gram = self.x.gram();
        let w = linalg::solve_gram_restricted(&gram, &[0, 1], &[1.0, 1.0])?;
        Ok((2..self.x.cols())
            .map(|j| gram.get(j, 0) * w[0] + gram.get(j, 1) * w[1])
            .collect())
    }
}

/// Two passes of modified Gram-Schmidt over the columns of `a`.
fn orthonormal_columns(a: &DenseMatrix) -> Result<Vec<Vec<f64>>> {
    let mut cols: Vec<Vec<f64>> = (0..a.cols()).map(|j| a.column(j)).collect();
    for _ in 0..2 {
        for j in 0..cols.len() {
            let (done, rest) = cols.split_at_mut(j);
            let v = &mut rest[0];
            for u in done.iter() {
                let r = linalg::dot(u, v);
                v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= r * ui);
            }
            let norm = linalg::norm2(v);
            if !(norm > 1e-10) {
                return Err(Error::Singular { support: vec![j] });
            }
            v.iter_mut().for_each(|vi| *vi /= norm);
        }
    }
    Ok(cols)
}

/// Builds the correlated design. The orthonormal basis comes from a seeded
/// `n x p` Gaussian matrix; unspecified `alphas` are drawn from the same
/// stream afterwards, uniform on `(0, 1)`.
pub fn build_counter_example(
    p: usize,
    n: usize,
    alphas: Option<&[f64]>,
    betas: [f64; 3],
    seed: u64,
) -> Result<CounterExample> {
    if p < 4 {
        return Err(Error::InvalidParameter(format!("need p >= 4, got {p}")));
    }
    if n < p {
        return Err(Error::InvalidParameter(format!(
            "need n >= p, got n = {n}, p = {p}"
        )));
    }
    if !(betas[0] > betas[1] && betas[1] > betas[2] && betas[2] > 0.0) || !betas[0].is_finite() {
        return Err(Error::InvalidParameter(
            "betas must satisfy b1 > b2 > b3 > 0".into(),
        ));
    }
    let mut stream = SeededStream::new(seed);
    let raw = DenseMatrix::new(n, p, (0..n * p).map(|_| stream.normal()).collect())?;
    let basis = orthonormal_columns(&raw)?;
    let alphas: Vec<f64> = match alphas {
        Some(a) => {
            if a.len() != p - 2 {
                return Err(Error::Dimension(format!(
                    "expected {} alphas, got {}",
                    p - 2,
                    a.len()
                )));
            }
            if let Some(bad) = a.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
                return Err(Error::InvalidParameter(format!(
                    "alpha {bad} outside (0, 1)"
                )));
            }
            a.to_vec()
        }
        None => (2..p)
            .map(|_| loop {
                let u = stream.uniform();
                if u > 0.0 {
                    break u;
                }
            })
            .collect(),
    };

    let mut columns = vec![basis[0].clone(), basis[1].clone()];
    for (j, &a) in (2..p).zip(&alphas) {
        let c = (1.0 - a * a - (1.0 - a) * (1.0 - a)).sqrt();
        columns.push(
            (0..n)
                .map(|i| a * basis[0][i] + (1.0 - a) * basis[1][i] + c * basis[j][i])
                .collect(),
        );
    }
    let x = DenseMatrix::from_columns(&columns)?;
    let y: Vec<f64> = (0..n)
        .map(|i| betas[0] * x.get(i, 0) + betas[1] * x.get(i, 1) + betas[2] * x.get(i, 2))
        .collect();
    Ok(CounterExample {
        x,
        y,
        alphas,
        betas,
        true_support: vec![0, 1, 2],
    })
}

/// Outcome of insertion-only path following on the correlated design.
/// Index sets are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterExampleReport {
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    pub lambda_max: f64,
    /// `S_1, S_2, ...` as produced by successive loops.
    pub supports: Vec<Vec<usize>>,
    pub status: PathStatus,
    /// Right-hand side of the sign equation with `S = {1, 2}`.
    pub leading_pair_rhs: Vec<f64>,
    pub small_lambda: f64,
    pub oracle_support: Vec<usize>,
    /// Support of the full-mode path at `small_lambda`.
    pub full_path_support: Vec<usize>,
    pub true_support: Vec<usize>,
}

/// Support threshold applied to oracle and path coefficients.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

fn support_of(beta: &[f64]) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| b.abs() > SUPPORT_THRESHOLD)
        .map(|(j, _)| j + 1)
        .collect()
}

/// Runs the demonstration on `build_counter_example(p, 2p, None,
/// DEFAULT_BETAS, seed)`, comparing against the oracle at
/// `1e-4 lambda_max`.
pub fn reproduce_counter_example(seed: u64, p: usize) -> Result<CounterExampleReport> {
    let ce = build_counter_example(p, 2 * p, None, DEFAULT_BETAS, seed)?;
    let base = ce.problem(1.0)?;
    let lambda_max = base.lambda_max();
    let insertion = solve_path(
        &base,
        &PathOptions {
            mode: PathMode::InsertionOnly,
            min_lambda: 0.0,
        },
    )?;
    let small_lambda = 1e-4 * lambda_max;
    let oracle = oracle_solve(&base.with_lambda(small_lambda)?, 1e-10)?;
    let full = solve_path(
        &base,
        &PathOptions {
            mode: PathMode::Full,
            min_lambda: 0.0,
        },
    )?;
    Ok(CounterExampleReport {
        seed,
        n: 2 * p,
        p,
        lambda_max,
        supports: insertion
            .visited_supports()
            .iter()
            .map(|s| s.one_based())
            .collect(),
        status: insertion.status.clone(),
        leading_pair_rhs: ce.leading_pair_rhs()?,
        small_lambda,
        oracle_support: support_of(&oracle),
        full_path_support: support_of(&eval_path_at(&full, small_lambda)?),
        true_support: ce.true_support.iter().map(|j| j + 1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_have_unit_norm_and_prescribed_correlations() {
        let ce = build_counter_example(7, 12, None, DEFAULT_BETAS, 4).unwrap();
        let g = ce.x.gram();
        for j in 0..7 {
            assert!((g.get(j, j) - 1.0).abs() < 1e-12);
        }
        assert!(g.get(0, 1).abs() < 1e-12);
        for (j, a) in (2..7).zip(&ce.alphas) {
            assert!((g.get(j, 0) - a).abs() < 1e-12);
            assert!((g.get(j, 1) - (1.0 - a)).abs() < 1e-12);
        }
    }

    #[test]
    fn leading_pair_rhs_is_all_ones() {
        let ce = build_counter_example(6, 6, None, DEFAULT_BETAS, 9).unwrap();
        for v in ce.leading_pair_rhs().unwrap() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_counter_example(3, 6, None, DEFAULT_BETAS, 0).is_err());
        assert!(build_counter_example(5, 4, None, DEFAULT_BETAS, 0).is_err());
        assert!(build_counter_example(4, 4, Some(&[0.5, 1.0]), DEFAULT_BETAS, 0).is_err());
        assert!(build_counter_example(4, 4, Some(&[0.5]), DEFAULT_BETAS, 0).is_err());
        assert!(build_counter_example(4, 4, None, [1.0, 2.0, 0.5], 0).is_err());
    }

    #[test]
    fn response_is_noiseless() {
        let ce = build_counter_example(5, 8, Some(&[0.2, 0.5, 0.9]), DEFAULT_BETAS, 1).unwrap();
        let fitted = ce.x.matvec(&ce.beta_star());
        for (a, b) in fitted.iter().zip(&ce.y) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
