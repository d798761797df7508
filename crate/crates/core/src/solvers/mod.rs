//! Iterative Lasso solvers. Each run starts from `x0` (zero by default),
//! records `k = 0` and then every `record_every`-th iterate, and stops when
//! the optimality residual drops to `gap_tol` or `max_iters` is exhausted.
//!
//! Inside the loops only the cached `X'X`, `X'y` and `y'y` are used, so
//! per-iteration work is O(p^2) regardless of n.

mod cgda;
mod ista;
mod sla;

use std::time::Instant;

pub use cgda::solve_cgda;
pub(crate) use ista::prox_step;
pub use ista::{solve_fista, solve_ista, solve_ista_scaled};
pub use sla::{sla_step, solve_sla, solve_sla_continuation};

pub use crate::trace::{Algorithm, IterateTrace, SolveStatus, TraceRecord};

use crate::error::{Error, Result};
use crate::problem::{LassoProblem, SurrogateParams};

/// Coordinate visiting semantics for CGDA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// Each coordinate update sees the values already updated in this sweep.
    #[default]
    GaussSeidel,
    /// Every coordinate in a sweep is computed from the previous sweep.
    Jacobi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once the optimality residual is at most this value.
    pub gap_tol: f64,
    /// Optional stop on `|F(b^(k)) - F(b^(k-1))| <= obj_tol`.
    pub obj_tol: Option<f64>,
    pub record_every: usize,
    pub sweep: SweepOrder,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            gap_tol: 1e-8,
            obj_tol: None,
            record_every: 1,
            sweep: SweepOrder::GaussSeidel,
        }
    }
}

impl SolverConfig {
    /// Runs exactly `k` iterations unless an exact optimum is hit first.
    pub fn fixed_iterations(k: usize) -> Self {
        Self {
            max_iters: k,
            gap_tol: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter(
                "record_every must be at least 1".into(),
            ));
        }
        if !(self.gap_tol >= 0.0) {
            return Err(Error::InvalidParameter(
                "gap_tol must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

fn start_point(problem: &LassoProblem, x0: Option<&[f64]>) -> Result<Vec<f64>> {
    match x0 {
        None => Ok(vec![0.0; problem.p()]),
        Some(x) if x.len() == problem.p() => Ok(x.to_vec()),
        Some(x) => Err(Error::Dimension(format!(
            "x0 has length {} but p = {}",
            x.len(),
            problem.p()
        ))),
    }
}

/// Bookkeeping shared by all solvers: timing, record thinning and the stop test.
struct Recorder<'a> {
    problem: &'a LassoProblem,
    cfg: &'a SolverConfig,
    surrogate: Option<SurrogateParams>,
    start: Instant,
    prev_objective: f64,
    trace: IterateTrace,
}

impl<'a> Recorder<'a> {
    fn new(
        problem: &'a LassoProblem,
        cfg: &'a SolverConfig,
        algorithm: Algorithm,
        x0: &[f64],
        surrogate: Option<SurrogateParams>,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut rec = Self {
            problem,
            cfg,
            surrogate,
            start: Instant::now(),
            prev_objective: f64::NAN,
            trace: IterateTrace::new(algorithm),
        };
        let r = rec.make_record(0, x0)?;
        rec.prev_objective = r.objective;
        rec.trace.records.push(r);
        Ok(rec)
    }

    fn make_record(&self, k: usize, beta: &[f64]) -> Result<TraceRecord> {
        let objective = self.problem.objective_unchecked(beta);
        if !objective.is_finite() || beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Divergence {
                algorithm: self.trace.algorithm,
                iteration: k,
            });
        }
        Ok(TraceRecord {
            k,
            beta: beta.to_vec(),
            objective,
            kkt: Some(self.problem.kkt_unchecked(beta)),
            surrogate: self
                .surrogate
                .map(|s| self.problem.surrogate_objective_unchecked(beta, s)),
            elapsed: self.start.elapsed(),
        })
    }

    /// Handles iterate `k`; returns `true` when the run should stop.
    /// `residual` overrides the Lasso KKT residual as the stopping measure.
    fn observe(&mut self, k: usize, beta: &[f64], residual: Option<f64>) -> Result<bool> {
        let rec = self.make_record(k, beta)?;
        let measure = residual.unwrap_or_else(|| rec.kkt.unwrap_or(f64::INFINITY));
        let mut stop = measure <= self.cfg.gap_tol;
        if let Some(tol) = self.cfg.obj_tol {
            stop |= (rec.objective - self.prev_objective).abs() <= tol;
        }
        self.prev_objective = rec.objective;
        if stop {
            self.trace.status = SolveStatus::Converged(k);
        }
        if stop || k.is_multiple_of(self.cfg.record_every) || k == self.cfg.max_iters {
            self.trace.records.push(rec);
        }
        Ok(stop)
    }

    fn finish(self) -> IterateTrace {
        self.trace
    }
}
