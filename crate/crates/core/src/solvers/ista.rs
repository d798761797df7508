use super::{start_point, Recorder, SolverConfig};
use crate::descent::fista_t_next;
use crate::error::{Error, Result};
use crate::problem::{shrink, LassoProblem};
use crate::trace::{Algorithm, IterateTrace, SolveStatus};

/// Proximal-gradient step `S(a - s (X'X a - X'y) / (nL), s lambda / L)`
/// written with `nL = sigma_max(X'X)`; `s = 1` is the textbook step.
pub(crate) fn prox_step(problem: &LassoProblem, a: &[f64], scale: f64) -> Vec<f64> {
    let lg = problem.gram_sigma();
    let step = scale / lg;
    let level = problem.n() as f64 * problem.lambda() * step;
    let ga = problem.gram().matvec(a);
    a.iter()
        .zip(ga.iter().zip(problem.xty()))
        .map(|(&ai, (g, q))| shrink(ai - step * (g - q), level))
        .collect()
}

/// `X = 0`: any lambda > 0 has the zero solution; lambda = 0 has no step.
fn degenerate(
    problem: &LassoProblem,
    algorithm: Algorithm,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<IterateTrace> {
    if problem.lambda() == 0.0 {
        return Err(Error::Degenerate(
            "Lipschitz constant is zero and lambda is zero".into(),
        ));
    }
    let mut rec = Recorder::new(problem, cfg, algorithm, x0, None)?;
    rec.observe(1, &vec![0.0; problem.p()], None)?;
    let mut trace = rec.finish();
    trace.status = SolveStatus::Converged(1);
    Ok(trace)
}

/// ISTA: `b^(k+1) = S(b^(k) - (X'X b^(k) - X'y)/(nL), lambda/L)`.
pub fn solve_ista(
    problem: &LassoProblem,
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<IterateTrace> {
    solve_ista_scaled(problem, x0, cfg, 1.0)
}

/// ISTA with its step (and threshold) multiplied by `step_scale`. Scales
/// above 2 break the descent property; the bound checker's sensitivity
/// test uses this.
pub fn solve_ista_scaled(
    problem: &LassoProblem,
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
    step_scale: f64,
) -> Result<IterateTrace> {
    if !(step_scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step scale must be positive, got {step_scale}"
        )));
    }
    let mut beta = start_point(problem, x0)?;
    if problem.gram_sigma() == 0.0 {
        return degenerate(problem, Algorithm::Ista, &beta, cfg);
    }
    let mut rec = Recorder::new(problem, cfg, Algorithm::Ista, &beta, None)?;
    for k in 1..=cfg.max_iters {
        beta = prox_step(problem, &beta, step_scale);
        if rec.observe(k, &beta, None)? {
            break;
        }
    }
    Ok(rec.finish())
}

/// FISTA with `a^(1) = b^(0)`, `t_1 = 1`:
///
/// ```text
/// b^(k)     = S(a^(k) - (X'X a^(k) - X'y)/(nL), lambda/L)
/// t_{k+1}   = (1 + sqrt(1 + 4 t_k^2)) / 2
/// a^(k+1)   = b^(k) + (t_k - 1)/t_{k+1} (b^(k) - b^(k-1))
/// ```
pub fn solve_fista(
    problem: &LassoProblem,
    x0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<IterateTrace> {
    let mut beta = start_point(problem, x0)?;
    if problem.gram_sigma() == 0.0 {
        return degenerate(problem, Algorithm::Fista, &beta, cfg);
    }
    let mut rec = Recorder::new(problem, cfg, Algorithm::Fista, &beta, None)?;
    let mut alpha = beta.clone();
    let mut t = 1.0;
    for k in 1..=cfg.max_iters {
        let next = prox_step(problem, &alpha, 1.0);
        let t_next = fista_t_next(t);
        let w = (t - 1.0) / t_next;
        alpha = next
            .iter()
            .zip(&beta)
            .map(|(b, b_prev)| b + w * (b - b_prev))
            .collect();
        beta = next;
        t = t_next;
        if rec.observe(k, &beta, None)? {
            break;
        }
    }
    Ok(rec.finish())
}
