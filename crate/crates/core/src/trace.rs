use std::fmt;
use std::time::Duration;

/// Which recursion produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Ista,
    Fista,
    Cgda,
    Sla,
    GradientDescent,
    AcceleratedGradient,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ista => "ista",
            Algorithm::Fista => "fista",
            Algorithm::Cgda => "cgda",
            Algorithm::Sla => "sla",
            Algorithm::GradientDescent => "gd",
            Algorithm::AcceleratedGradient => "agd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub beta: Vec<f64>,
    /// `F(beta)` for Lasso solvers, `f(x)` for the generic descent runs.
    pub objective: f64,
    /// Lasso KKT residual; `None` for the generic descent runs.
    pub kkt: Option<f64>,
    /// Smoothed objective `F_alpha(beta)`, recorded by SLA only.
    pub surrogate: Option<f64>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Stopping rule met after this many iterations.
    Converged(usize),
    MaxItersReached,
}

impl SolveStatus {
    pub fn converged(self) -> bool {
        matches!(self, SolveStatus::Converged(_))
    }
}

#[derive(Debug, Clone)]
pub struct IterateTrace {
    pub algorithm: Algorithm,
    /// Records in strictly increasing `k`; `k = 0` is the starting point.
    pub records: Vec<TraceRecord>,
    pub status: SolveStatus,
}

impl IterateTrace {
    pub(crate) fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            records: Vec::new(),
            status: SolveStatus::MaxItersReached,
        }
    }

    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("trace always holds the starting point")
    }

    pub fn final_beta(&self) -> &[f64] {
        &self.last().beta
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.objective)
    }

    pub fn iterations(&self) -> usize {
        self.last().k
    }
}
