//! Small dense linear algebra kernel.
//!
//! Matrices are row-major `f64` buffers; vectors are plain `Vec<f64>` /
//! `&[f64]`. Sizes are desk scale (n up to ~10^4, p up to ~10^3), so nothing
//! here tries to be cache-blocked or parallel.

use crate::error::{Error, Result};

/// Power iteration stops once `||Av - rho v|| <= tol * rho`.
pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITERS: usize = 10_000;

/// Relative pivot floor used by the Cholesky factorization.
const PIVOT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Wraps a row-major buffer. Every entry must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "buffer of length {} cannot hold a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        let mut data = vec![0.0; rows * cols];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                data[i * cols + j] = *v;
            }
        }
        Self::new(rows, cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A' x`
    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    /// `A' A`, symmetric by construction.
    pub fn gram(&self) -> Self {
        let p = self.cols;
        let mut g = Self::zeros(p, p);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..p {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                for (b, rb) in r.iter().enumerate().skip(a) {
                    g.data[a * p + b] += ra * rb;
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                g.data[a * p + b] = g.data[b * p + a];
            }
        }
        g
    }

    /// Largest `|A_ij - A_ji|`; zero for an exactly symmetric matrix.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Columns `support` of `self`, in order.
    pub fn select_columns(&self, support: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, support.len());
        for i in 0..self.rows {
            for (c, &j) in support.iter().enumerate() {
                out.data[i * support.len() + c] = self.get(i, j);
            }
        }
        out
    }

    /// Principal submatrix on `support`.
    pub fn principal(&self, support: &[usize]) -> Self {
        let k = support.len();
        let mut out = Self::zeros(k, k);
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                out.data[a * k + b] = self.get(i, j);
            }
        }
        out
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    norm2_sq(a).sqrt()
}

#[inline]
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Squared Euclidean distance.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
///
/// Diagonal inputs are answered exactly from the diagonal. Otherwise power
/// iteration from a fixed start vector (ones, tilted by a small index ramp so
/// it cannot be orthogonal to a sign-alternating top eigenvector) runs until
/// the eigen-residual drops below `tol * rho`.
pub fn sigma_max(a: &DenseMatrix, tol: f64) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "sigma_max needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = a.asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let dim = a.rows();
    if dim == 0 {
        return Ok(0.0);
    }
    let diagonal = (0..dim).all(|i| (0..dim).all(|j| i == j || a.get(i, j) == 0.0));
    if diagonal {
        return Ok((0..dim).map(|i| a.get(i, i)).fold(0.0, f64::max));
    }

    let mut v: Vec<f64> = (0..dim)
        .map(|i| 1.0 + 0.5 * (i as f64 + 1.0) / dim as f64)
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut rho_prev = f64::NAN;
    let mut rel_change = f64::INFINITY;
    for _ in 0..POWER_MAX_ITERS {
        let w = a.matvec(&v);
        let rho = dot(&v, &w);
        let wn = norm2(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        let resid = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - rho * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if resid <= tol * rho.abs() {
            return Ok(rho);
        }
        if rho_prev.is_finite() {
            rel_change = (rho - rho_prev).abs() / rho.abs().max(f64::MIN_POSITIVE);
        }
        rho_prev = rho;
        v = w.into_iter().map(|x| x / wn).collect();
    }
    // A clustered top of the spectrum keeps the residual from decaying even
    // though the Rayleigh quotient has settled.
    if rel_change <= tol {
        return Ok(rho_prev);
    }
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: POWER_MAX_ITERS,
    })
}

/// Lower Cholesky factor `L` with `A = L L'`, row-major in a flat buffer.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Fails with `None` when a pivot falls below `1e-12 * max diag`. No ridge
    /// fallback: a near-singular Gram block must surface to the caller.
    pub fn factor(a: &DenseMatrix) -> Option<Self> {
        let n = a.rows();
        let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
        let floor = PIVOT_FLOOR * scale.max(f64::MIN_POSITIVE);
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > floor) {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Self { dim: n, lower: l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let l = &self.lower;
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= l[i * n + k] * z[k];
            }
            z[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * z[k];
            }
            z[i] = s / l[i * n + i];
        }
        z
    }
}

/// Solves `G_SS z = rhs` for a symmetric Gram matrix `G` restricted to
/// `support`. `rhs` is indexed like `support`.
pub fn solve_gram_restricted(
    gram: &DenseMatrix,
    support: &[usize],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    if rhs.len() != support.len() {
        return Err(Error::Dimension(
            "rhs length differs from support size".into(),
        ));
    }
    if support.is_empty() {
        return Ok(Vec::new());
    }
    let chol = Cholesky::factor(&gram.principal(support)).ok_or_else(|| Error::Singular {
        support: support.to_vec(),
    })?;
    Ok(chol.solve(rhs))
}

/// Least squares restricted to the columns in `support`: the returned
/// vector has length `p`, is zero off the support and solves the normal
/// equations `X_S'X_S b_S = X_S'y` on it.
pub fn restricted_least_squares(x: &DenseMatrix, y: &[f64], support: &[usize]) -> Result<Vec<f64>> {
    if y.len() != x.rows() {
        return Err(Error::Dimension(format!(
            "y has length {} but X has {} rows",
            y.len(),
            x.rows()
        )));
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= x.cols()) {
        return Err(Error::Dimension(format!(
            "support index {bad} out of range"
        )));
    }
    let mut beta = vec![0.0; x.cols()];
    if support.is_empty() {
        return Ok(beta);
    }
    let xs = x.select_columns(support);
    let chol = Cholesky::factor(&xs.gram()).ok_or_else(|| Error::Singular {
        support: support.to_vec(),
    })?;
    let coef = chol.solve(&xs.t_matvec(y));
    for (&j, c) in support.iter().zip(coef) {
        beta[j] = c;
    }
    Ok(beta)
}
