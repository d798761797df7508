use super::{start_point, Recorder, SolverConfig};
use crate::descent::{Momentum, MomentumSchedule};
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{LassoProblem, SurrogateParams};
use crate::trace::{Algorithm, IterateTrace};

/// Fixed SLA step `mu = 1 / (sigma_max(X'X/n) + lambda alpha / 2)`, the
/// reciprocal Lipschitz constant of the smoothed objective's gradient.
pub fn sla_step(problem: &LassoProblem, params: SurrogateParams) -> f64 {
    1.0 / (problem.lipschitz() + 0.5 * problem.lambda() * params.alpha())
}

/// Smooth-l1 algorithm: accelerated gradient descent on
/// `F_a(b) = ||y - Xb||^2/(2n) + lambda sum_i phi_a(b_i)` with step
/// [`sla_step`] and momentum weight `(k-2)/(k+1)`.
///
/// Records carry both `F` (as `objective`) and `F_a` (as `surrogate`); the
/// stopping test uses `||grad F_a||_inf`, since `F`'s KKT residual does not
/// vanish at the surrogate minimizer.
pub fn solve_sla(
    problem: &LassoProblem,
    params: SurrogateParams,
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<IterateTrace> {
    let mut beta = start_point(problem, x0)?;
    let step = sla_step(problem, params);
    if !step.is_finite() {
        return Err(Error::Degenerate(
            "Lipschitz constant is zero and lambda is zero".into(),
        ));
    }
    let mut rec = Recorder::new(problem, cfg, Algorithm::Sla, &beta, Some(params))?;
    let mut prev = beta.clone();
    let mut momentum = Momentum::new(MomentumSchedule::NesterovRatio);
    for k in 1..=cfg.max_iters {
        let w = momentum.weight(k);
        let y: Vec<f64> = beta
            .iter()
            .zip(&prev)
            .map(|(b, bp)| b + w * (b - bp))
            .collect();
        let g = problem.surrogate_grad_unchecked(&y, params);
        let next: Vec<f64> = y.iter().zip(&g).map(|(a, d)| a - step * d).collect();
        prev = std::mem::replace(&mut beta, next);
        let stationarity = linalg::norm_inf(&problem.surrogate_grad_unchecked(&beta, params));
        if rec.observe(k, &beta, Some(stationarity))? {
            break;
        }
    }
    Ok(rec.finish())
}

/// SLA with a geometric alpha schedule: `stages` runs at `alpha, 10 alpha,
/// 100 alpha, ...`, each warm-started from the previous result. Iteration
/// counters continue across stages in the returned trace.
pub fn solve_sla_continuation(
    problem: &LassoProblem,
    params: SurrogateParams,
    stages: usize,
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<IterateTrace> {
    if stages == 0 {
        return Err(Error::InvalidParameter(
            "continuation needs at least one stage".into(),
        ));
    }
    let mut alpha = params.alpha();
    let mut combined: Option<IterateTrace> = None;
    let mut start = start_point(problem, x0)?;
    for _ in 0..stages {
        let stage = solve_sla(problem, SurrogateParams::new(alpha)?, Some(&start), cfg)?;
        start = stage.final_beta().to_vec();
        combined = Some(match combined {
            None => stage,
            Some(mut acc) => {
                let offset = acc.iterations();
                acc.records
                    .extend(stage.records.into_iter().skip(1).map(|mut r| {
                        r.k += offset;
                        r
                    }));
                acc.status = stage.status;
                acc
            }
        });
        alpha *= 10.0;
    }
    Ok(combined.expect("at least one stage ran"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn records_surrogate_objective() {
        let prob = LassoProblem::new(DenseMatrix::identity(2), vec![1.0, -0.2], 0.1).unwrap();
        let params = SurrogateParams::new(5.0).unwrap();
        let t = solve_sla(&prob, params, None, &SolverConfig::fixed_iterations(5)).unwrap();
        for r in &t.records {
            let s = r.surrogate.unwrap();
            assert!(s >= r.objective);
        }
    }

    #[test]
    fn continuation_sharpens_alpha() {
        let prob = LassoProblem::new(DenseMatrix::identity(2), vec![1.0, -0.2], 0.1).unwrap();
        let params = SurrogateParams::new(5.0).unwrap();
        let cfg = SolverConfig {
            gap_tol: 1e-10,
            max_iters: 50_000,
            ..Default::default()
        };
        let one = solve_sla(&prob, params, None, &cfg).unwrap();
        let three = solve_sla_continuation(&prob, params, 3, None, &cfg).unwrap();
        // Exact answer with n = 2: S(y_j, n lambda) = (0.8, 0.0).
        let err = |b: &[f64]| (b[0] - 0.8).abs() + b[1].abs();
        assert!(err(three.final_beta()) < err(one.final_beta()));
        let ks: Vec<usize> = three.records.iter().map(|r| r.k).collect();
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
    }
}
