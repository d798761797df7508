//! The Lasso objective `F(b) = ||y - Xb||^2 / (2n) + lambda ||b||_1` and the
//! quantities derived from it.
//!
//! Everything a solver touches inside its loop goes through the cached
//! sufficient statistics `X'X`, `X'y` and `y'y`; the design matrix itself is
//! only kept around for callers that want it (path polishing, LARS, I/O).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

#[derive(Debug)]
struct Stats {
    design: Option<DenseMatrix>,
    response: Option<Vec<f64>>,
    n: usize,
    gram: DenseMatrix,
    xty: Vec<f64>,
    yty: f64,
    /// Largest eigenvalue of the unscaled Gram matrix `X'X`.
    gram_sigma: f64,
}

/// A Lasso instance. Cloning and re-targeting `lambda` share the cached
/// Gram data.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    stats: Arc<Stats>,
    lambda: f64,
}

impl LassoProblem {
    pub fn new(x: DenseMatrix, y: Vec<f64>, lambda: f64) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::Dimension(format!(
                "y has length {} but X has {} rows",
                y.len(),
                x.rows()
            )));
        }
        if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::Dimension("empty design matrix".into()));
        }
        check_lambda(lambda)?;
        let gram = x.gram();
        let xty = x.t_matvec(&y);
        let yty = linalg::norm2_sq(&y);
        let gram_sigma = linalg::sigma_max(&gram, linalg::POWER_TOL)?;
        Ok(Self {
            stats: Arc::new(Stats {
                n: x.rows(),
                design: Some(x),
                response: Some(y),
                gram,
                xty,
                yty,
                gram_sigma,
            }),
            lambda,
        })
    }

    /// Builds a problem from sufficient statistics only; `design()` and
    /// `response()` then return `None`.
    pub fn from_gram(
        gram: DenseMatrix,
        xty: Vec<f64>,
        yty: f64,
        n: usize,
        lambda: f64,
    ) -> Result<Self> {
        if !gram.is_square() || gram.rows() != xty.len() {
            return Err(Error::Dimension(
                "gram must be p x p with X'y of length p".into(),
            ));
        }
        if n == 0 {
            return Err(Error::Dimension("n must be positive".into()));
        }
        check_lambda(lambda)?;
        let gram_sigma = linalg::sigma_max(&gram, linalg::POWER_TOL)?;
        Ok(Self {
            stats: Arc::new(Stats {
                design: None,
                response: None,
                n,
                gram,
                xty,
                yty,
                gram_sigma,
            }),
            lambda,
        })
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            stats: Arc::clone(&self.stats),
            lambda,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.stats.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.stats.xty.len()
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.stats.gram
    }

    pub fn xty(&self) -> &[f64] {
        &self.stats.xty
    }

    pub fn yty(&self) -> f64 {
        self.stats.yty
    }

    pub fn design(&self) -> Option<&DenseMatrix> {
        self.stats.design.as_ref()
    }

    pub fn response(&self) -> Option<&[f64]> {
        self.stats.response.as_deref()
    }

    /// `L = sigma_max(X'X / n)`, the Lipschitz constant of the smooth part.
    #[inline]
    pub fn lipschitz(&self) -> f64 {
        self.stats.gram_sigma / self.n() as f64
    }

    /// `sigma_max(X'X) = n L`.
    #[inline]
    pub fn gram_sigma(&self) -> f64 {
        self.stats.gram_sigma
    }

    /// `||X'y||_inf / n`: the smallest lambda whose minimizer is zero.
    pub fn lambda_max(&self) -> f64 {
        linalg::norm_inf(self.xty()) / self.n() as f64
    }

    fn check_len(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.p() {
            return Err(Error::Dimension(format!(
                "beta has length {} but the problem has p = {}",
                beta.len(),
                self.p()
            )));
        }
        Ok(())
    }

    pub fn objective(&self, beta: &[f64]) -> Result<f64> {
        self.check_len(beta)?;
        Ok(self.objective_unchecked(beta))
    }

    pub fn grad_smooth(&self, beta: &[f64]) -> Result<Vec<f64>> {
        self.check_len(beta)?;
        Ok(self.grad_smooth_unchecked(beta))
    }

    /// Largest distance of `(X'y - X'X b)_j / n` to `lambda * d|b_j|`.
    pub fn kkt_residual(&self, beta: &[f64]) -> Result<f64> {
        self.check_len(beta)?;
        Ok(self.kkt_unchecked(beta))
    }

    pub fn surrogate_objective(&self, beta: &[f64], params: SurrogateParams) -> Result<f64> {
        self.check_len(beta)?;
        Ok(self.surrogate_objective_unchecked(beta, params))
    }

    /// `(X'X b - X'y)/n + lambda * tanh(alpha b / 2)`.
    pub fn surrogate_grad(&self, beta: &[f64], params: SurrogateParams) -> Result<Vec<f64>> {
        self.check_len(beta)?;
        Ok(self.surrogate_grad_unchecked(beta, params))
    }

    /// `||y - Xb||^2 / (2n)` from the cached statistics.
    pub(crate) fn smooth_value(&self, beta: &[f64]) -> f64 {
        let gb = self.gram().matvec(beta);
        let quad: f64 = beta
            .iter()
            .zip(gb.iter().zip(self.xty()))
            .map(|(b, (g, q))| b * (g - 2.0 * q))
            .sum();
        (self.yty() + quad) / (2.0 * self.n() as f64)
    }

    pub(crate) fn objective_unchecked(&self, beta: &[f64]) -> f64 {
        self.smooth_value(beta) + self.lambda * linalg::norm1(beta)
    }

    pub(crate) fn grad_smooth_unchecked(&self, beta: &[f64]) -> Vec<f64> {
        let n = self.n() as f64;
        self.gram()
            .matvec(beta)
            .iter()
            .zip(self.xty())
            .map(|(g, q)| (g - q) / n)
            .collect()
    }

    pub(crate) fn kkt_unchecked(&self, beta: &[f64]) -> f64 {
        let n = self.n() as f64;
        let gb = self.gram().matvec(beta);
        let lam = self.lambda;
        beta.iter()
            .zip(gb.iter().zip(self.xty()))
            .map(|(&b, (g, q))| {
                let corr = (q - g) / n;
                if b > 0.0 {
                    (corr - lam).abs()
                } else if b < 0.0 {
                    (corr + lam).abs()
                } else {
                    (corr.abs() - lam).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    pub(crate) fn surrogate_objective_unchecked(
        &self,
        beta: &[f64],
        params: SurrogateParams,
    ) -> f64 {
        let pen: f64 = beta.iter().map(|&b| surrogate_phi(b, params)).sum();
        self.smooth_value(beta) + self.lambda * pen
    }

    pub(crate) fn surrogate_grad_unchecked(
        &self,
        beta: &[f64],
        params: SurrogateParams,
    ) -> Vec<f64> {
        let half_alpha = 0.5 * params.alpha();
        let lam = self.lambda;
        let mut g = self.grad_smooth_unchecked(beta);
        for (gi, b) in g.iter_mut().zip(beta) {
            *gi += lam * (half_alpha * b).tanh();
        }
        g
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

/// `S(x, a)`: `x - a` above `a`, `x + a` below `-a`, zero in between.
pub fn soft_threshold(x: f64, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "soft-threshold level must be nonnegative, got {alpha}"
        )));
    }
    Ok(shrink(x, alpha))
}

pub fn soft_threshold_vec(x: &[f64], alpha: f64) -> Result<Vec<f64>> {
    x.iter().map(|&v| soft_threshold(v, alpha)).collect()
}

#[inline]
pub(crate) fn shrink(x: f64, alpha: f64) -> f64 {
    if x >= alpha {
        x - alpha
    } else if x <= -alpha {
        x + alpha
    } else {
        0.0
    }
}

/// Sharpness of the softplus surrogate of `|x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateParams {
    alpha: f64,
}

impl SurrogateParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "surrogate alpha must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    #[inline]
    pub fn alpha(self) -> f64 {
        self.alpha
    }
}

/// `phi_a(x) = (log(1 + e^{-ax}) + log(1 + e^{ax})) / a`, evaluated as
/// `|x| + (2/a) log(1 + e^{-a|x|})` so large `|ax|` cannot overflow.
pub fn surrogate_phi(x: f64, params: SurrogateParams) -> f64 {
    let a = params.alpha;
    let ax = x.abs();
    ax + (2.0 / a) * (-a * ax).exp().ln_1p()
}

/// `d phi_a / dx = tanh(a x / 2)`.
pub fn surrogate_phi_derivative(x: f64, params: SurrogateParams) -> f64 {
    (0.5 * params.alpha * x).tanh()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_problem() -> LassoProblem {
        let x = DenseMatrix::new(1, 1, vec![2.0]).unwrap();
        LassoProblem::new(x, vec![4.0], 1.0).unwrap()
    }

    #[test]
    fn scalar_objective() {
        let prob = scalar_problem();
        assert_eq!(prob.objective(&[1.0]).unwrap(), 3.0);
        assert_eq!(prob.objective(&[0.0]).unwrap(), 8.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let prob = scalar_problem();
        assert!(matches!(
            prob.objective(&[1.0, 2.0]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(prob.grad_smooth(&[]), Err(Error::Dimension(_))));
        assert!(matches!(
            prob.kkt_residual(&[1.0, 0.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn negative_lambda_rejected() {
        let x = DenseMatrix::identity(2);
        assert!(LassoProblem::new(x, vec![1.0, 1.0], -0.1).is_err());
    }

    #[test]
    fn soft_threshold_branches() {
        assert_eq!(soft_threshold(3.0, 1.0).unwrap(), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0).unwrap(), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0).unwrap(), -2.0);
        assert!(soft_threshold(1.0, -1.0).is_err());
    }

    #[test]
    fn kkt_at_zero() {
        // X = I (n = 3), y = (1, -2, 0.5): lambda_max = 2/3.
        let prob = LassoProblem::new(DenseMatrix::identity(3), vec![1.0, -2.0, 0.5], 1.0).unwrap();
        assert_eq!(prob.kkt_residual(&[0.0; 3]).unwrap(), 0.0);
        let free = prob.with_lambda(0.0).unwrap();
        assert!((free.kkt_residual(&[0.0; 3]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn surrogate_at_origin() {
        for a in [0.5, 1.0, 7.0, 200.0] {
            let p = SurrogateParams::new(a).unwrap();
            let want = 2.0 * std::f64::consts::LN_2 / a;
            assert!((surrogate_phi(0.0, p) - want).abs() < 1e-15);
        }
        assert!(SurrogateParams::new(0.0).is_err());
    }

    #[test]
    fn surrogate_stable_for_huge_arguments() {
        let p = SurrogateParams::new(1e3).unwrap();
        assert_eq!(surrogate_phi(1e6, p), 1e6);
        assert!(surrogate_phi(-800.0, p).is_finite());
    }

    #[test]
    fn surrogate_gradient_at_zero_is_minus_xty_over_n() {
        let prob = LassoProblem::new(DenseMatrix::identity(2), vec![1.5, -0.5], 0.3).unwrap();
        let p = SurrogateParams::new(10.0).unwrap();
        let g = prob.surrogate_grad(&[0.0, 0.0], p).unwrap();
        assert_eq!(g, vec![-0.75, 0.25]);
    }

    #[test]
    fn lipschitz_of_identity_design() {
        let prob = LassoProblem::new(DenseMatrix::identity(4), vec![0.0; 4], 0.0).unwrap();
        assert_eq!(prob.gram_sigma(), 1.0);
        assert_eq!(prob.lipschitz(), 0.25);
    }
}
