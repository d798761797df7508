//! Regularization paths: exact piecewise-linear homotopy in lambda, the
//! correlated-design instance on which insertion-only path following breaks
//! down, and least angle regression.

mod counter_example;
mod homotopy;
mod lars;

pub use counter_example::{
    build_counter_example, reproduce_counter_example, CounterExample, CounterExampleReport,
    DEFAULT_BETAS,
};
pub use homotopy::{solve_path, PathMode, PathOptions};
pub use lars::{solve_lars, LarsBreakpoint, LarsPath};

use crate::error::{Error, Result};
use crate::problem::LassoProblem;

/// `||X'y||_inf / n`.
pub fn lambda_max(problem: &LassoProblem) -> f64 {
    problem.lambda_max()
}

/// Active indices (0-based, sorted) with the sign of each coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportSet {
    indices: Vec<usize>,
    signs: Vec<i8>,
}

impl SupportSet {
    pub fn new(mut pairs: Vec<(usize, i8)>) -> Result<Self> {
        pairs.sort_unstable_by_key(|&(j, _)| j);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate support index".into()));
        }
        if pairs.iter().any(|&(_, s)| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(
                "support signs must be +1 or -1".into(),
            ));
        }
        Ok(Self {
            indices: pairs.iter().map(|&(j, _)| j).collect(),
            signs: pairs.iter().map(|&(_, s)| s).collect(),
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// 1-based indices, the convention used in reports and CSV output.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|j| j + 1).collect()
    }

    fn insert(&mut self, j: usize, sign: i8) {
        let pos = self.indices.binary_search(&j).unwrap_err();
        self.indices.insert(pos, j);
        self.signs.insert(pos, sign);
    }

    fn remove(&mut self, j: usize) {
        if let Ok(pos) = self.indices.binary_search(&j) {
            self.indices.remove(pos);
            self.signs.remove(pos);
        }
    }
}

/// One linear piece: on `[lambda_lo, lambda_hi]` the active coefficients are
/// `intercept + lambda * slope`, all other coefficients are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSegment {
    pub lambda_hi: f64,
    pub lambda_lo: f64,
    pub support: SupportSet,
    pub intercept: Vec<f64>,
    pub slope: Vec<f64>,
}

impl PathSegment {
    pub fn beta_at(&self, lambda: f64, p: usize) -> Vec<f64> {
        let mut beta = vec![0.0; p];
        for ((&j, a), b) in self
            .support
            .indices()
            .iter()
            .zip(&self.intercept)
            .zip(&self.slope)
        {
            beta[j] = a + lambda * b;
        }
        beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathEventKind {
    Insert,
    Delete,
}

/// A support change. Loop `k` is the step that produced support `S_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEvent {
    pub loop_index: usize,
    pub lambda: f64,
    pub index: usize,
    pub kind: PathEventKind,
    pub support_after: SupportSet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FailureReason {
    /// Several inactive features reach `|c_j| = lambda` at the same kink, so
    /// no single insertion keeps the optimality conditions consistent.
    SimultaneousEntry { indices: Vec<usize> },
    /// Inactive features whose correlation tracks `lambda` identically along
    /// the segment; their insertion point is undetermined.
    DegenerateBoundary { indices: Vec<usize> },
    /// An active coefficient crosses zero before the next insertion, which
    /// insertion-only following cannot represent.
    SignCrossing { index: usize, lambda: f64 },
}

/// Diagnostic attached to a path that could not be continued by insertions.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertionFailure {
    pub loop_index: usize,
    /// Lambda at which the path stops.
    pub lambda: f64,
    pub support: SupportSet,
    /// Inactive indices, in the order of `rhs` and `boundary_ratio`.
    pub inactive: Vec<usize>,
    /// `X_{S^c}' X_S (X_S' X_S)^{-1} sign(b_S)`.
    pub rhs: Vec<f64>,
    /// `c_j(lambda) / lambda` for each inactive feature at the stopping
    /// lambda, where `c = X'(y - Xb)/n`.
    pub boundary_ratio: Vec<f64>,
    /// Largest `|c_j(lambda)| / lambda - 1` over the features named in
    /// `reason` (zero when they sit exactly on the boundary).
    pub residual: f64,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathStatus {
    Completed,
    FailedInsertion(Box<InsertionFailure>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegPath {
    pub p: usize,
    pub segments: Vec<PathSegment>,
    /// `lambda_0 > lambda_1 > ... > lambda_K`.
    pub kinks: Vec<f64>,
    pub events: Vec<PathEvent>,
    pub status: PathStatus,
}

impl RegPath {
    pub fn lambda_hi(&self) -> f64 {
        self.kinks[0]
    }

    pub fn lambda_lo(&self) -> f64 {
        *self.kinks.last().expect("path has at least one kink")
    }

    pub fn completed(&self) -> bool {
        matches!(self.status, PathStatus::Completed)
    }

    pub fn failure(&self) -> Option<&InsertionFailure> {
        match &self.status {
            PathStatus::FailedInsertion(f) => Some(f),
            PathStatus::Completed => None,
        }
    }

    /// Supports in the order they were visited, `S_1, S_2, ...`.
    pub fn visited_supports(&self) -> Vec<SupportSet> {
        self.events
            .iter()
            .map(|e| e.support_after.clone())
            .collect()
    }
}

/// Evaluates the path at `lam` from its containing segment. At and above
/// `lambda_0` the coefficients are exactly zero.
pub fn eval_path_at(path: &RegPath, lam: f64) -> Result<Vec<f64>> {
    let (lo, hi) = (path.lambda_lo(), path.lambda_hi());
    let slack = 1e-12 * hi.max(1.0);
    if !(lam >= lo - slack && lam <= hi + slack) {
        return Err(Error::OutOfRange {
            lambda: lam,
            lo,
            hi,
        });
    }
    if lam >= hi {
        return Ok(vec![0.0; path.p]);
    }
    let seg = path
        .segments
        .iter()
        .find(|s| lam >= s.lambda_lo && lam <= s.lambda_hi)
        .or_else(|| path.segments.last())
        .expect("lam below lambda_0 implies a segment exists");
    Ok(seg.beta_at(lam, path.p))
}
