//! Generic first-order machinery: plain gradient descent, accelerated
//! proximal gradient, the l1 prox and a backtracking line search.
//!
//! The Lasso solvers in [`crate::solvers`] are specialisations of these
//! recursions written against the cached Gram matrix; the generic versions
//! here take closures and are what the lemma-level bound checks run on.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg;
use crate::problem::shrink;
use crate::trace::{Algorithm, IterateTrace, SolveStatus, TraceRecord};

/// Smallest step the line search will try before giving up.
pub const MIN_STEP: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Constant step `gamma`, which should not exceed `1/L`.
    Fixed(f64),
    /// Start each iteration at 1 and multiply by `shrink` until the
    /// sufficient-decrease test passes.
    Backtracking { shrink: f64 },
}

impl StepRule {
    pub fn fixed(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step must be positive, got {gamma}"
            )));
        }
        Ok(StepRule::Fixed(gamma))
    }

    pub fn backtracking(shrink: f64) -> Result<Self> {
        check_shrink(shrink)?;
        Ok(StepRule::Backtracking { shrink })
    }
}

fn check_shrink(shrink: f64) -> Result<()> {
    if !(shrink > 0.0 && shrink < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "backtracking shrink factor must lie in (0, 1), got {shrink}"
        )));
    }
    Ok(())
}

/// Extrapolation weight applied to `x^(k-1) - x^(k-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumSchedule {
    None,
    /// `(k - 2) / (k + 1)`, clamped at zero for `k = 1`.
    NesterovRatio,
    /// `(t_{k-1} - 1) / t_k` with `t_1 = 1`, `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`.
    FistaT,
}

/// Stateful generator of momentum weights, one per iteration `k = 1, 2, ...`.
#[derive(Debug, Clone)]
pub(crate) struct Momentum {
    schedule: MomentumSchedule,
    t: f64,
}

impl Momentum {
    pub(crate) fn new(schedule: MomentumSchedule) -> Self {
        Self { schedule, t: 1.0 }
    }

    pub(crate) fn weight(&mut self, k: usize) -> f64 {
        match self.schedule {
            MomentumSchedule::None => 0.0,
            MomentumSchedule::NesterovRatio => ((k as f64 - 2.0) / (k as f64 + 1.0)).max(0.0),
            MomentumSchedule::FistaT => {
                if k < 2 {
                    return 0.0;
                }
                let t_next = fista_t_next(self.t);
                let w = (self.t - 1.0) / t_next;
                self.t = t_next;
                w
            }
        }
    }
}

#[inline]
pub(crate) fn fista_t_next(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// Nonsmooth part `h` of `f = g + h`, accessed through its proximal map.
pub trait ProxTerm {
    fn value(&self, x: &[f64]) -> f64;
    /// `argmin_z ||x - z||^2 / (2t) + h(z)`
    fn prox(&self, x: &[f64], t: f64) -> Vec<f64>;
}

/// `h = 0`; the prox is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPenalty;

impl ProxTerm for NoPenalty {
    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn prox(&self, x: &[f64], _t: f64) -> Vec<f64> {
        x.to_vec()
    }
}

/// `h = lambda ||x||_1`.
#[derive(Debug, Clone, Copy)]
pub struct L1Penalty {
    pub lambda: f64,
}

impl ProxTerm for L1Penalty {
    fn value(&self, x: &[f64]) -> f64 {
        self.lambda * linalg::norm1(x)
    }

    fn prox(&self, x: &[f64], t: f64) -> Vec<f64> {
        let level = t * self.lambda;
        x.iter().map(|&v| shrink(v, level)).collect()
    }
}

/// Prox of `lambda ||.||_1` with parameter `t`: elementwise `S(x_i, t lambda)`.
pub fn prox_l1(x: &[f64], t: f64, lambda: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "prox parameter must be positive, got {t}"
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    Ok(L1Penalty { lambda }.prox(x, t))
}

/// Largest `gamma = shrink^m` with `f(x - gamma g) <= f(x) - gamma/2 ||g||^2`,
/// where `g = grad_x` is the gradient at `x`.
pub fn backtracking_search<F>(f: F, x: &[f64], grad_x: &[f64], shrink: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    check_shrink(shrink)?;
    let fx = f(x);
    let gsq = linalg::norm2_sq(grad_x);
    let mut gamma = 1.0;
    loop {
        let trial: Vec<f64> = x.iter().zip(grad_x).map(|(a, g)| a - gamma * g).collect();
        if f(&trial) <= fx - 0.5 * gamma * gsq {
            return Ok(gamma);
        }
        gamma *= shrink;
        if gamma < MIN_STEP {
            return Err(Error::LineSearchFailure);
        }
    }
}

fn record(k: usize, x: &[f64], value: f64, start: Instant) -> TraceRecord {
    TraceRecord {
        k,
        beta: x.to_vec(),
        objective: value,
        kkt: None,
        surrogate: None,
        elapsed: start.elapsed(),
    }
}

fn ensure_finite(algorithm: Algorithm, k: usize, value: f64, x: &[f64]) -> Result<()> {
    if !value.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            algorithm,
            iteration: k,
        });
    }
    Ok(())
}

/// Gradient descent `x^(k) = x^(k-1) - gamma_{k-1} grad f(x^(k-1))` for
/// `iters` iterations. Records every iterate including `x^(0)`.
pub fn run_gd<F, G>(f: F, grad: G, x0: &[f64], rule: StepRule, iters: usize) -> Result<IterateTrace>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    if iters == 0 {
        return Err(Error::InvalidParameter("iters must be at least 1".into()));
    }
    let algorithm = Algorithm::GradientDescent;
    let start = Instant::now();
    let mut trace = IterateTrace::new(algorithm);
    let mut x = x0.to_vec();
    let fx = f(&x);
    ensure_finite(algorithm, 0, fx, &x)?;
    trace.records.push(record(0, &x, fx, start));

    for k in 1..=iters {
        let g = grad(&x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                algorithm,
                iteration: k,
            });
        }
        let gamma = match rule {
            StepRule::Fixed(gamma) => gamma,
            StepRule::Backtracking { shrink } => backtracking_search(&f, &x, &g, shrink)?,
        };
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= gamma * gi;
        }
        let fx = f(&x);
        ensure_finite(algorithm, k, fx, &x)?;
        trace.records.push(record(k, &x, fx, start));
    }
    trace.status = SolveStatus::MaxItersReached;
    Ok(trace)
}

/// Accelerated proximal gradient on `f = g + h`:
///
/// ```text
/// y^(k) = x^(k-1) + w_k (x^(k-1) - x^(k-2))
/// x^(k) = prox_{gamma_k}(y^(k) - gamma_k grad g(y^(k)))
/// ```
///
/// with `x^(-1) = x^(0)` and `w_k` from `schedule`. The prox parameter and
/// the gradient step share the same `gamma_k`.
pub fn run_agd<G, DG, H>(
    g: G,
    grad_g: DG,
    h: &H,
    x0: &[f64],
    rule: StepRule,
    schedule: MomentumSchedule,
    iters: usize,
) -> Result<IterateTrace>
where
    G: Fn(&[f64]) -> f64,
    DG: Fn(&[f64]) -> Vec<f64>,
    H: ProxTerm + ?Sized,
{
    if iters == 0 {
        return Err(Error::InvalidParameter("iters must be at least 1".into()));
    }
    let algorithm = Algorithm::AcceleratedGradient;
    let start = Instant::now();
    let mut trace = IterateTrace::new(algorithm);
    let mut momentum = Momentum::new(schedule);
    let mut x = x0.to_vec();
    let mut x_prev = x0.to_vec();
    let fx = g(&x) + h.value(&x);
    ensure_finite(algorithm, 0, fx, &x)?;
    trace.records.push(record(0, &x, fx, start));

    for k in 1..=iters {
        let w = momentum.weight(k);
        let y: Vec<f64> = x
            .iter()
            .zip(&x_prev)
            .map(|(a, b)| a + w * (a - b))
            .collect();
        let gy = grad_g(&y);
        if gy.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                algorithm,
                iteration: k,
            });
        }
        let gamma = match rule {
            StepRule::Fixed(gamma) => gamma,
            StepRule::Backtracking { shrink } => backtracking_search(&g, &y, &gy, shrink)?,
        };
        let step: Vec<f64> = y.iter().zip(&gy).map(|(a, d)| a - gamma * d).collect();
        let next = h.prox(&step, gamma);
        x_prev = std::mem::replace(&mut x, next);
        let fx = g(&x) + h.value(&x);
        ensure_finite(algorithm, k, fx, &x)?;
        trace.records.push(record(k, &x, fx, start));
    }
    Ok(trace)
}
