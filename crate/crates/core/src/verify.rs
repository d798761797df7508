//! Reference solutions, convergence-bound checks and multi-solver benchmarks.
//!
//! The oracle runs FISTA (with gradient-based momentum restart) far past the
//! precision any solver under test is asked for, then replaces the iterate
//! by the exact solution of the optimality conditions on its support when
//! that solution is sign-consistent. Bound checks compare each recorded
//! `F(b^(k)) - F(b_hat)` against the closed-form right-hand side of the rate
//! the algorithm is known to satisfy.

use std::time::Duration;

use crate::descent::fista_t_next;
use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::{LassoProblem, SurrogateParams};
use crate::solvers::{
    prox_step, solve_cgda, solve_fista, solve_ista_scaled, solve_sla, SolverConfig,
};
use crate::trace::{Algorithm, IterateTrace};

/// Default oracle precision (KKT residual).
pub const ORACLE_TOL: f64 = 1e-10;
const ORACLE_MAX_ITERS: usize = 1_000_000;
/// Iterations the thresholded support must stay fixed before polishing.
const STABLE_WINDOW: usize = 100;
/// Slack below `-BOUND_ALLOWANCE` counts as a violation.
pub const BOUND_ALLOWANCE: f64 = 1e-9;
pub const GAP_TARGETS: [f64; 3] = [1e-2, 1e-4, 1e-6];

fn support_of(beta: &[f64]) -> Vec<usize> {
    let cut = 1e-10 * linalg::norm_inf(beta).max(1.0);
    (0..beta.len()).filter(|&j| beta[j].abs() > cut).collect()
}

/// High-precision minimizer with `kkt_residual <= tol`.
pub fn oracle_solve(problem: &LassoProblem, tol: f64) -> Result<Vec<f64>> {
    if !(tol >= 1e-12) || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "oracle tol must be >= 1e-12, got {tol}"
        )));
    }
    let p = problem.p();
    if problem.lambda() >= problem.lambda_max() {
        return Ok(vec![0.0; p]);
    }
    let target = tol / 10.0;
    let mut beta = vec![0.0; p];
    let mut alpha = beta.clone();
    let mut t: f64 = 1.0;
    let mut support = support_of(&beta);
    let mut last_change = 0;
    let mut reached = false;
    for k in 1..=ORACLE_MAX_ITERS {
        let next = prox_step(problem, &alpha, 1.0);
        let restart = alpha
            .iter()
            .zip(&next)
            .zip(&beta)
            .map(|((a, x), b)| (a - x) * (x - b))
            .sum::<f64>()
            > 0.0;
        let (w, t_next) = if restart {
            (0.0, 1.0)
        } else {
            let t_next = fista_t_next(t);
            ((t - 1.0) / t_next, t_next)
        };
        alpha = next
            .iter()
            .zip(&beta)
            .map(|(x, b)| x + w * (x - b))
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                algorithm: Algorithm::Fista,
                iteration: k,
            });
        }
        beta = next;
        t = t_next;
        let s = support_of(&beta);
        if s != support {
            support = s;
            last_change = k;
        }
        reached = problem.kkt_unchecked(&beta) <= target;
        if reached && k - last_change >= STABLE_WINDOW {
            return Ok(polish(problem, beta, &support, tol));
        }
    }
    if reached {
        Err(Error::OracleUnstable)
    } else {
        Err(Error::NoConvergence {
            what: "oracle",
            iterations: ORACLE_MAX_ITERS,
        })
    }
}

/// Solves `X_S'X_S b_S = X_S'y - n lambda sign(b_S)` and keeps the result
/// when its signs agree and its KKT residual is within `tol`.
fn polish(problem: &LassoProblem, beta: Vec<f64>, support: &[usize], tol: f64) -> Vec<f64> {
    let nl = problem.n() as f64 * problem.lambda();
    let rhs: Vec<f64> = support
        .iter()
        .map(|&j| problem.xty()[j] - nl * beta[j].signum())
        .collect();
    let Ok(z) = linalg::solve_gram_restricted(problem.gram(), support, &rhs) else {
        return beta;
    };
    let mut polished = vec![0.0; problem.p()];
    for (&j, v) in support.iter().zip(&z) {
        if v.signum() != beta[j].signum() || *v == 0.0 {
            return beta;
        }
        polished[j] = *v;
    }
    if problem.kkt_unchecked(&polished) <= tol {
        polished
    } else {
        beta
    }
}

/// Convergence guarantees the checker knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    /// `L ||b0 - b_hat||^2 / (2k)`.
    T1Ista,
    /// `2 L ||b0 - b_hat||^2 / (k+1)^2`.
    T2Fista,
    /// `4 L (1+p) ||b0 - b_hat||^2 / (k + 8/p)`.
    T3Cgda,
    /// `4 ||b0 - b_hat||^2 L / k^2 + 4 sqrt(2 lambda n ln 2) ||b0 - b_hat|| / k`,
    /// measured on the unsmoothed objective.
    T4Sla,
    /// `||x0 - x*||^2 / (2 gamma k)`.
    L1Gd,
    /// `2 ||x0 - x*||^2 / (gamma (k+1)^2)`.
    L2Agd,
}

impl Bound {
    pub fn id(self) -> &'static str {
        match self {
            Bound::T1Ista => "T1-ISTA",
            Bound::T2Fista => "T2-FISTA",
            Bound::T3Cgda => "T3-CGDA",
            Bound::T4Sla => "T4-SLA",
            Bound::L1Gd => "L1-GD",
            Bound::L2Agd => "L2-AGD",
        }
    }

    pub fn algorithm(self) -> Algorithm {
        match self {
            Bound::T1Ista => Algorithm::Ista,
            Bound::T2Fista => Algorithm::Fista,
            Bound::T3Cgda => Algorithm::Cgda,
            Bound::T4Sla => Algorithm::Sla,
            Bound::L1Gd => Algorithm::GradientDescent,
            Bound::L2Agd => Algorithm::AcceleratedGradient,
        }
    }

    pub fn for_algorithm(algorithm: Algorithm) -> Bound {
        match algorithm {
            Algorithm::Ista => Bound::T1Ista,
            Algorithm::Fista => Bound::T2Fista,
            Algorithm::Cgda => Bound::T3Cgda,
            Algorithm::Sla => Bound::T4Sla,
            Algorithm::GradientDescent => Bound::L1Gd,
            Algorithm::AcceleratedGradient => Bound::L2Agd,
        }
    }

    fn is_lemma(self) -> bool {
        matches!(self, Bound::L1Gd | Bound::L2Agd)
    }
}

/// Right-hand side of a Lasso rate at iteration `k >= 1`, with
/// `dist_sq = ||b0 - b_hat||^2`.
pub fn theorem_rhs(bound: Bound, problem: &LassoProblem, k: usize, dist_sq: f64) -> f64 {
    let k = k as f64;
    let l = problem.lipschitz();
    let p = problem.p() as f64;
    match bound {
        Bound::T1Ista => l * dist_sq / (2.0 * k),
        Bound::T2Fista => 2.0 * l * dist_sq / ((k + 1.0) * (k + 1.0)),
        Bound::T3Cgda => 4.0 * l * (1.0 + p) * dist_sq / (k + 8.0 / p),
        Bound::T4Sla => {
            let n = problem.n() as f64;
            4.0 * dist_sq * l / (k * k)
                + 4.0
                    * (2.0 * problem.lambda() * n * std::f64::consts::LN_2).sqrt()
                    * dist_sq.sqrt()
                    / k
        }
        Bound::L1Gd | Bound::L2Agd => f64::NAN,
    }
}

/// Right-hand side of a smooth-descent lemma at iteration `k >= 1`.
pub fn lemma_rhs(bound: Bound, gamma: f64, k: usize, dist_sq: f64) -> f64 {
    let k = k as f64;
    match bound {
        Bound::L1Gd => dist_sq / (2.0 * gamma * k),
        Bound::L2Agd => 2.0 * dist_sq / (gamma * (k + 1.0) * (k + 1.0)),
        _ => f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub k: usize,
    pub gap: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// First recorded iteration whose slack is below `-BOUND_ALLOWANCE`.
    ViolatedAt(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub bound: Bound,
    /// One row per recorded `k >= 1`.
    pub rows: Vec<BoundRow>,
    pub verdict: Verdict,
    /// Smallest slack over all rows (`+inf` when there are none).
    pub min_slack: f64,
}

impl BoundReport {
    fn from_rows(bound: Bound, rows: Vec<BoundRow>) -> Self {
        let verdict = rows
            .iter()
            .find(|r| r.slack < -BOUND_ALLOWANCE)
            .map_or(Verdict::Holds, |r| Verdict::ViolatedAt(r.k));
        let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        Self {
            bound,
            rows,
            verdict,
            min_slack,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

fn ensure_pairing(trace: &IterateTrace, bound: Bound) -> Result<()> {
    if trace.algorithm != bound.algorithm() {
        return Err(Error::BoundMismatch {
            algorithm: trace.algorithm,
            bound: bound.id(),
        });
    }
    Ok(())
}

/// Checks a Lasso solver trace against its rate, using `beta_hat` (normally
/// the oracle solution) for `F(b_hat)` and `||b0 - b_hat||`.
pub fn check_bound(
    trace: &IterateTrace,
    problem: &LassoProblem,
    beta_hat: &[f64],
    bound: Bound,
) -> Result<BoundReport> {
    ensure_pairing(trace, bound)?;
    if bound.is_lemma() {
        return Err(Error::BoundMismatch {
            algorithm: trace.algorithm,
            bound: bound.id(),
        });
    }
    let f_star = problem.objective(beta_hat)?;
    let dist_sq = linalg::dist_sq(&trace.records[0].beta, beta_hat);
    let rows = trace
        .records
        .iter()
        .filter(|r| r.k >= 1)
        .map(|r| {
            let gap = r.objective - f_star;
            let rhs = theorem_rhs(bound, problem, r.k, dist_sq);
            BoundRow {
                k: r.k,
                gap,
                rhs,
                slack: rhs - gap,
            }
        })
        .collect();
    Ok(BoundReport::from_rows(bound, rows))
}

/// Checks a `run_gd` / `run_agd` trace with fixed step `gamma` against the
/// matching lemma, given the minimizer and the minimum value.
pub fn check_lemma_bound(
    trace: &IterateTrace,
    x_star: &[f64],
    f_star: f64,
    gamma: f64,
    bound: Bound,
) -> Result<BoundReport> {
    ensure_pairing(trace, bound)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {gamma}"
        )));
    }
    let x0 = &trace.records[0].beta;
    if x0.len() != x_star.len() {
        return Err(Error::Dimension(
            "x_star length differs from the iterates".into(),
        ));
    }
    let dist_sq = linalg::dist_sq(x0, x_star);
    let rows = trace
        .records
        .iter()
        .filter(|r| r.k >= 1)
        .map(|r| {
            let gap = r.objective - f_star;
            let rhs = lemma_rhs(bound, gamma, r.k, dist_sq);
            BoundRow {
                k: r.k,
                gap,
                rhs,
                slack: rhs - gap,
            }
        })
        .collect();
    Ok(BoundReport::from_rows(bound, rows))
}

/// Solver selection for [`bench_run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverSpec {
    Ista,
    Fista,
    Cgda,
    Sla(SurrogateParams),
    /// ISTA with its step multiplied by the given factor; checked against
    /// the plain ISTA rate.
    IstaScaled(f64),
}

impl SolverSpec {
    pub fn label(&self) -> String {
        match self {
            SolverSpec::Ista => "ista".into(),
            SolverSpec::Fista => "fista".into(),
            SolverSpec::Cgda => "cgda".into(),
            SolverSpec::Sla(_) => "sla".into(),
            SolverSpec::IstaScaled(s) => format!("ista-x{s}"),
        }
    }

    pub fn bound(&self) -> Bound {
        match self {
            SolverSpec::Ista | SolverSpec::IstaScaled(_) => Bound::T1Ista,
            SolverSpec::Fista => Bound::T2Fista,
            SolverSpec::Cgda => Bound::T3Cgda,
            SolverSpec::Sla(_) => Bound::T4Sla,
        }
    }

    pub fn run(&self, problem: &LassoProblem, cfg: &SolverConfig) -> Result<IterateTrace> {
        match *self {
            SolverSpec::Ista => solve_ista_scaled(problem, None, cfg, 1.0),
            SolverSpec::Fista => solve_fista(problem, None, cfg),
            SolverSpec::Cgda => solve_cgda(problem, None, cfg),
            SolverSpec::Sla(params) => solve_sla(problem, params, None, cfg),
            SolverSpec::IstaScaled(s) => solve_ista_scaled(problem, None, cfg, s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Iterations per solver (no early stop).
    pub iters: usize,
    pub check_bounds: bool,
    pub oracle_tol: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            iters: 1000,
            check_bounds: false,
            oracle_tol: ORACLE_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchEntry {
    pub label: String,
    pub spec: SolverSpec,
    /// First recorded `k` with gap at or below each of [`GAP_TARGETS`].
    pub iterations_to_gap: [Option<usize>; 3],
    pub wall_time: Duration,
    pub final_kkt: f64,
    pub trace: IterateTrace,
    pub bound: Option<BoundReport>,
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub oracle_beta: Vec<f64>,
    pub oracle_objective: f64,
    pub entries: Vec<BenchEntry>,
}

/// One line of the plot table.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub algo: String,
    pub k: usize,
    pub objective: f64,
    pub gap: f64,
    /// `None` at `k = 0`, where the rates are undefined.
    pub bound_rhs: Option<f64>,
}

impl BenchResult {
    pub fn any_violation(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.bound.as_ref().is_some_and(|b| !b.holds()))
    }

    pub fn trace_rows(&self, problem: &LassoProblem) -> Vec<TraceRow> {
        let mut rows = Vec::new();
        for e in &self.entries {
            let dist_sq = linalg::dist_sq(&e.trace.records[0].beta, &self.oracle_beta);
            for r in &e.trace.records {
                rows.push(TraceRow {
                    algo: e.label.clone(),
                    k: r.k,
                    objective: r.objective,
                    gap: r.objective - self.oracle_objective,
                    bound_rhs: (r.k >= 1)
                        .then(|| theorem_rhs(e.spec.bound(), problem, r.k, dist_sq)),
                });
            }
        }
        rows
    }
}

/// Runs every solver from zero for `cfg.iters` iterations on scoped
/// threads, sharing a single oracle solution.
pub fn bench_run(
    problem: &LassoProblem,
    solvers: &[SolverSpec],
    cfg: &BenchConfig,
) -> Result<BenchResult> {
    if solvers.is_empty() {
        return Err(Error::InvalidParameter(
            "bench needs at least one solver".into(),
        ));
    }
    let oracle_beta = oracle_solve(problem, cfg.oracle_tol)?;
    let oracle_objective = problem.objective(&oracle_beta)?;
    let solver_cfg = SolverConfig::fixed_iterations(cfg.iters);
    let traces: Vec<Result<IterateTrace>> = std::thread::scope(|scope| {
        let handles: Vec<_> = solvers
            .iter()
            .map(|spec| scope.spawn(|| spec.run(problem, &solver_cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });

    let mut entries = Vec::with_capacity(solvers.len());
    for (spec, trace) in solvers.iter().zip(traces) {
        let trace = trace?;
        let mut iterations_to_gap = [None; 3];
        for (slot, target) in iterations_to_gap.iter_mut().zip(GAP_TARGETS) {
            *slot = trace
                .records
                .iter()
                .find(|r| r.objective - oracle_objective <= target)
                .map(|r| r.k);
        }
        let bound = if cfg.check_bounds {
            Some(check_bound(&trace, problem, &oracle_beta, spec.bound())?)
        } else {
            None
        };
        entries.push(BenchEntry {
            label: spec.label(),
            spec: *spec,
            iterations_to_gap,
            wall_time: trace.last().elapsed,
            final_kkt: problem.kkt_unchecked(trace.final_beta()),
            trace,
            bound,
        });
    }
    Ok(BenchResult {
        oracle_beta,
        oracle_objective,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::solvers::solve_ista;

    fn identity_problem() -> LassoProblem {
        LassoProblem::new(DenseMatrix::identity(3), vec![3.0, -0.5, -3.0], 1.0 / 3.0).unwrap()
    }

    #[test]
    fn oracle_identity_closed_form() {
        assert_eq!(
            oracle_solve(&identity_problem(), ORACLE_TOL).unwrap(),
            vec![2.0, 0.0, -2.0]
        );
    }

    #[test]
    fn oracle_above_lambda_max_is_zero() {
        let prob = identity_problem();
        let prob = prob.with_lambda(prob.lambda_max()).unwrap();
        assert_eq!(oracle_solve(&prob, ORACLE_TOL).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn oracle_rejects_tiny_tol() {
        assert!(oracle_solve(&identity_problem(), 1e-13).is_err());
    }

    #[test]
    fn ista_first_step_rhs() {
        let prob = identity_problem();
        let t = solve_ista(&prob, None, &SolverConfig::fixed_iterations(1)).unwrap();
        let hat = oracle_solve(&prob, ORACLE_TOL).unwrap();
        let rep = check_bound(&t, &prob, &hat, Bound::T1Ista).unwrap();
        // L = 1/3, ||b_hat||^2 = 8.
        assert_eq!(rep.rows.len(), 1);
        assert!((rep.rows[0].rhs - 8.0 / 6.0).abs() < 1e-15);
        assert!(rep.holds());
    }

    #[test]
    fn mismatched_pairing_is_an_error() {
        let prob = identity_problem();
        let t = solve_ista(&prob, None, &SolverConfig::fixed_iterations(2)).unwrap();
        assert!(matches!(
            check_bound(&t, &prob, &[2.0, 0.0, -2.0], Bound::T2Fista),
            Err(Error::BoundMismatch { .. })
        ));
    }

    #[test]
    fn identity_bench_reaches_targets_quickly() {
        let prob = identity_problem();
        let solvers = [SolverSpec::Ista, SolverSpec::Fista, SolverSpec::Cgda];
        let cfg = BenchConfig {
            iters: 5,
            check_bounds: true,
            ..Default::default()
        };
        let res = bench_run(&prob, &solvers, &cfg).unwrap();
        for e in &res.entries {
            assert!(
                e.iterations_to_gap
                    .iter()
                    .all(|k| k.is_some_and(|k| k <= 2)),
                "{}",
                e.label
            );
        }
        assert!(!res.any_violation());
    }

    #[test]
    fn empty_solver_list_rejected() {
        assert!(bench_run(&identity_problem(), &[], &BenchConfig::default()).is_err());
    }
}
