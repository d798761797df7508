use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky, DenseMatrix};

/// Relative gap below which two correlations (or step lengths) are equal.
const TIE: f64 = 1e-10;
const UNIT_NORM_TOL: f64 = 1e-8;

/// Coefficients at the start of a LARS step, with the common absolute
/// correlation `C = max_j |X_j'(y - Xb)|` of the active set there.
#[derive(Debug, Clone, PartialEq)]
pub struct LarsBreakpoint {
    pub max_correlation: f64,
    pub beta: Vec<f64>,
    /// Active indices (0-based) in entry order.
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LarsPath {
    /// 0-based indices in the order they entered.
    pub entry_order: Vec<usize>,
    /// `breakpoints[0]` is `b = 0`; the last one ends the procedure.
    pub breakpoints: Vec<LarsBreakpoint>,
}

impl LarsPath {
    /// Coefficients where the active correlation equals `c`, interpolated
    /// linearly inside the containing step. Beyond either end the nearest
    /// breakpoint is returned.
    pub fn coefficients_at_correlation(&self, c: f64) -> Vec<f64> {
        let first = &self.breakpoints[0];
        if c >= first.max_correlation {
            return first.beta.clone();
        }
        for w in self.breakpoints.windows(2) {
            let (hi, lo) = (&w[0], &w[1]);
            if c >= lo.max_correlation {
                let span = hi.max_correlation - lo.max_correlation;
                let t = if span > 0.0 {
                    (hi.max_correlation - c) / span
                } else {
                    1.0
                };
                return hi
                    .beta
                    .iter()
                    .zip(&lo.beta)
                    .map(|(a, b)| a + t * (b - a))
                    .collect();
            }
        }
        self.breakpoints.last().expect("nonempty").beta.clone()
    }

    /// Coefficients at the Lasso-scaled level `C = n lambda`.
    pub fn coefficients_at_lambda(&self, lambda: f64, n: usize) -> Vec<f64> {
        self.coefficients_at_correlation(n as f64 * lambda)
    }
}

/// Least angle regression without the Lasso drop step. Starting from zero,
/// the active set moves along the equiangular direction until an inactive
/// predictor's absolute correlation with the residual catches up, which
/// then joins. Stops when `min(n, p)` predictors are active (after the last
/// move reaches the least-squares fit on them) or the correlation vanishes.
pub fn solve_lars(x: &DenseMatrix, y: &[f64]) -> Result<LarsPath> {
    let (n, p) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "y has length {} but X has {n} rows",
            y.len()
        )));
    }
    for j in 0..p {
        let norm = linalg::norm2(&x.column(j));
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "column {} has norm {norm}; LARS needs unit-norm columns",
                j + 1
            )));
        }
    }
    let gram = x.gram();
    let mut beta = vec![0.0; p];
    let mut corr = x.t_matvec(y);
    let mut active: Vec<usize> = Vec::new();
    let mut breakpoints = Vec::new();
    let scale = linalg::norm_inf(&corr).max(f64::MIN_POSITIVE);

    let first = argmax_unique(&corr, &active, scale)?;
    let Some(first) = first else {
        breakpoints.push(LarsBreakpoint {
            max_correlation: 0.0,
            beta,
            active,
        });
        return Ok(LarsPath {
            entry_order: Vec::new(),
            breakpoints,
        });
    };
    active.push(first);
    let limit = n.min(p);

    loop {
        let c = active.iter().map(|&j| corr[j].abs()).fold(0.0, f64::max);
        breakpoints.push(LarsBreakpoint {
            max_correlation: c,
            beta: beta.clone(),
            active: active.clone(),
        });
        if c <= TIE * scale {
            break;
        }
        let signs: Vec<f64> = active.iter().map(|&j| corr[j].signum()).collect();
        let mut ga = DenseMatrix::zeros(active.len(), active.len());
        for (r, (&i, si)) in active.iter().zip(&signs).enumerate() {
            for (s, (&j, sj)) in active.iter().zip(&signs).enumerate() {
                ga.set(r, s, si * sj * gram.get(i, j));
            }
        }
        let chol = Cholesky::factor(&ga).ok_or_else(|| {
            let mut support = active.clone();
            support.sort_unstable();
            Error::Singular { support }
        })?;
        let z = chol.solve(&vec![1.0; active.len()]);
        let norm_const = 1.0 / z.iter().sum::<f64>().sqrt();
        // Equiangular direction in coefficient space and its correlations.
        let mut dir = vec![0.0; p];
        for ((&j, s), zj) in active.iter().zip(&signs).zip(&z) {
            dir[j] = norm_const * s * zj;
        }
        let a = gram.matvec(&dir);

        let mut step = c / norm_const;
        let mut entering = None;
        if active.len() < limit {
            let mut best = f64::INFINITY;
            let mut cands: Vec<(f64, usize)> = Vec::new();
            for j in (0..p).filter(|j| !active.contains(j)) {
                for g in [
                    (c - corr[j]) / (norm_const - a[j]),
                    (c + corr[j]) / (norm_const + a[j]),
                ] {
                    if g > TIE * step && g.is_finite() {
                        cands.push((g, j));
                        best = best.min(g);
                    }
                }
            }
            if best < step {
                let mut tied: Vec<usize> = cands
                    .iter()
                    .filter(|(g, _)| *g <= best * (1.0 + TIE))
                    .map(|&(_, j)| j)
                    .collect();
                tied.sort_unstable();
                tied.dedup();
                if tied.len() > 1 {
                    return Err(Error::Ambiguous(tied[0], tied[1]));
                }
                step = best;
                entering = Some(tied[0]);
            }
        }
        for (b, d) in beta.iter_mut().zip(&dir) {
            *b += step * d;
        }
        corr = x.t_matvec(&linalg::sub(y, &x.matvec(&beta)));
        match entering {
            Some(j) => active.push(j),
            None => {
                breakpoints.push(LarsBreakpoint {
                    max_correlation: active.iter().map(|&j| corr[j].abs()).fold(0.0, f64::max),
                    beta: beta.clone(),
                    active: active.clone(),
                });
                break;
            }
        }
    }
    Ok(LarsPath {
        entry_order: active,
        breakpoints,
    })
}

/// Index of the largest `|corr_j|` outside `active`, erroring on a tie and
/// returning `None` when every correlation is zero.
fn argmax_unique(corr: &[f64], active: &[usize], scale: f64) -> Result<Option<usize>> {
    let mut order: Vec<usize> = (0..corr.len()).filter(|j| !active.contains(j)).collect();
    order.sort_by(|&a, &b| corr[b].abs().total_cmp(&corr[a].abs()).then(a.cmp(&b)));
    let Some(&top) = order.first() else {
        return Ok(None);
    };
    if corr[top].abs() <= TIE * scale {
        return Ok(None);
    }
    if let Some(&second) = order.get(1) {
        if corr[top].abs() - corr[second].abs() <= TIE * scale {
            return Err(Error::Ambiguous(top.min(second), top.max(second)));
        }
    }
    Ok(Some(top))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_predictor_reaches_least_squares() {
        let x = DenseMatrix::new(2, 1, vec![0.6, 0.8]).unwrap();
        let path = solve_lars(&x, &[1.0, 2.0]).unwrap();
        assert_eq!(path.entry_order, vec![0]);
        let last = path.breakpoints.last().unwrap();
        assert!((last.beta[0] - 2.2).abs() < 1e-12);
        assert!(last.max_correlation < 1e-12);
    }

    #[test]
    fn orthonormal_design_follows_soft_threshold() {
        let y = vec![0.5, -3.0, 2.0, 1.0];
        let path = solve_lars(&DenseMatrix::identity(4), &y).unwrap();
        assert_eq!(path.entry_order, vec![1, 2, 3, 0]);
        for c in [2.5, 1.5, 0.7, 0.2] {
            let b = path.coefficients_at_correlation(c);
            for (bj, yj) in b.iter().zip(&y) {
                let want = yj.signum() * (yj.abs() - c).max(0.0);
                assert!((bj - want).abs() < 1e-12, "c={c}");
            }
        }
    }

    #[test]
    fn tie_is_ambiguous() {
        let err = solve_lars(&DenseMatrix::identity(3), &[1.0, -1.0, 0.5]).unwrap_err();
        assert!(matches!(err, Error::Ambiguous(0, 1)));
    }

    #[test]
    fn non_unit_columns_rejected() {
        let x = DenseMatrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            solve_lars(&x, &[1.0, 0.0]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn zero_response_stops_immediately() {
        let path = solve_lars(&DenseMatrix::identity(2), &[0.0, 0.0]).unwrap();
        assert!(path.entry_order.is_empty());
        assert_eq!(path.breakpoints.len(), 1);
    }
}
