//! Deterministic synthetic data for `y = X b* + sigma w`.
//!
//! Stream layout (stable across releases, so fixtures stay portable):
//!
//! 1. Generator: ChaCha20 keyed by `ChaCha20Rng::seed_from_u64(seed)`.
//! 2. Uniforms: `(next_u64 >> 11) * 2^-53`, in `[0, 1)`.
//! 3. Normals: Box-Muller, cosine branch only. `u1 = 1 - uniform()`,
//!    `u2 = uniform()`, `z = sqrt(-2 ln u1) cos(2 pi u2)`; two draws each.
//! 4. Draw order: `X` row-major (`n p` normals); support positions by a
//!    partial Fisher-Yates shuffle of `0..p` taking `i + next_u64 % (p - i)`
//!    for `i < s`, then sorted; for each support index in ascending order a
//!    magnitude `lo + (hi - lo) uniform()` followed by a sign draw (negative
//!    when `uniform() < 0.5`); finally `n` noise normals.
//! 5. With `standardize`, columns are scaled to unit Euclidean norm before
//!    `y` is formed, so `y = X b*` still holds exactly in the noiseless case.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::problem::LassoProblem;

/// Seeded uniform/normal stream with the layout documented above.
pub struct SeededStream {
    rng: ChaCha20Rng,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Index in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        (self.rng.next_u64() % bound as u64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub p: usize,
    pub sparsity: usize,
    pub sigma: f64,
    /// Nonzero coefficients have magnitude in `[coef_min, coef_max]`.
    pub coef_min: f64,
    pub coef_max: f64,
    pub seed: u64,
    pub standardize: bool,
}

impl GenSpec {
    pub fn new(n: usize, p: usize, sparsity: usize, sigma: f64, seed: u64) -> Self {
        Self {
            n,
            p,
            sparsity,
            sigma,
            coef_min: 0.5,
            coef_max: 2.0,
            seed,
            standardize: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidParameter("n and p must be positive".into()));
        }
        if self.sparsity > self.p {
            return Err(Error::InvalidParameter(format!(
                "sparsity {} exceeds p = {}",
                self.sparsity, self.p
            )));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(
                "sigma must be finite and nonnegative".into(),
            ));
        }
        if !(self.coef_min > 0.0 && self.coef_min <= self.coef_max && self.coef_max.is_finite()) {
            return Err(Error::InvalidParameter(
                "coefficient range must satisfy 0 < min <= max".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub beta_star: Vec<f64>,
}

pub fn gen_linear(spec: &GenSpec) -> Result<GeneratedData> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut stream = SeededStream::new(spec.seed);

    let mut entries: Vec<f64> = (0..n * p).map(|_| stream.normal()).collect();

    let mut order: Vec<usize> = (0..p).collect();
    for i in 0..spec.sparsity {
        let j = i + stream.below(p - i);
        order.swap(i, j);
    }
    let mut support = order[..spec.sparsity].to_vec();
    support.sort_unstable();

    let mut beta_star = vec![0.0; p];
    for &j in &support {
        let mag = spec.coef_min + (spec.coef_max - spec.coef_min) * stream.uniform();
        beta_star[j] = if stream.uniform() < 0.5 { -mag } else { mag };
    }

    if spec.standardize {
        for j in 0..p {
            let norm = (0..n)
                .map(|i| entries[i * p + j].powi(2))
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                for i in 0..n {
                    entries[i * p + j] /= norm;
                }
            }
        }
    }
    let x = DenseMatrix::new(n, p, entries)?;
    let mut y = x.matvec(&beta_star);
    for yi in y.iter_mut() {
        let w = stream.normal();
        *yi += spec.sigma * w;
    }
    Ok(GeneratedData { x, y, beta_star })
}

/// Generates data and wraps it as a Lasso problem with
/// `lambda = lambda_fraction * lambda_max`.
pub fn lasso_instance(
    spec: &GenSpec,
    lambda_fraction: f64,
) -> Result<(GeneratedData, LassoProblem)> {
    let data = gen_linear(spec)?;
    let base = LassoProblem::new(data.x.clone(), data.y.clone(), 0.0)?;
    let problem = base.with_lambda(lambda_fraction * base.lambda_max())?;
    Ok((data, problem))
}

/// Euclidean norms of the columns of `x`.
pub fn column_norms(x: &DenseMatrix) -> Vec<f64> {
    (0..x.cols()).map(|j| linalg::norm2(&x.column(j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_is_exact() {
        let mut spec = GenSpec::new(30, 10, 4, 0.0, 3);
        let d = gen_linear(&spec).unwrap();
        assert_eq!(d.x.matvec(&d.beta_star), d.y);
        spec.standardize = true;
        let d = gen_linear(&spec).unwrap();
        assert_eq!(d.x.matvec(&d.beta_star), d.y);
    }

    #[test]
    fn identical_seeds_identical_output() {
        let spec = GenSpec::new(20, 8, 3, 0.7, 11);
        assert_eq!(gen_linear(&spec).unwrap(), gen_linear(&spec).unwrap());
        let other = GenSpec {
            seed: 12,
            ..spec.clone()
        };
        assert_ne!(gen_linear(&spec).unwrap(), gen_linear(&other).unwrap());
    }

    #[test]
    fn sparsity_is_exact() {
        for s in [0, 1, 5, 8] {
            let d = gen_linear(&GenSpec::new(20, 8, s, 0.1, 5)).unwrap();
            assert_eq!(d.beta_star.iter().filter(|b| **b != 0.0).count(), s);
        }
    }

    #[test]
    fn standardized_columns_have_unit_norm() {
        let spec = GenSpec {
            standardize: true,
            ..GenSpec::new(40, 6, 2, 0.3, 9)
        };
        let d = gen_linear(&spec).unwrap();
        for norm in column_norms(&d.x) {
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(gen_linear(&GenSpec::new(10, 3, 4, 0.1, 0)).is_err());
        assert!(gen_linear(&GenSpec::new(10, 3, 1, -1.0, 0)).is_err());
        assert!(gen_linear(&GenSpec::new(0, 3, 1, 0.0, 0)).is_err());
    }

    #[test]
    fn uniforms_in_unit_interval() {
        let mut s = SeededStream::new(1);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
