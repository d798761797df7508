use super::{
    FailureReason, InsertionFailure, PathEvent, PathEventKind, PathSegment, PathStatus, RegPath,
    SupportSet,
};
use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::problem::LassoProblem;

/// Candidates within `TIE * lambda_0` of each other are simultaneous.
const TIE: f64 = 1e-9;
/// `|1 -+ c1| <= DEGENERATE` together with `|c0| <= DEGENERATE * lambda_0`
/// marks an inactive correlation that tracks the boundary identically.
const DEGENERATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathMode {
    /// Insertions and zero-crossing deletions: the standard homotopy.
    #[default]
    Full,
    /// Only single insertions, one per loop. Stops with
    /// [`PathStatus::FailedInsertion`] when that is not enough.
    InsertionOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathOptions {
    pub mode: PathMode,
    /// Stop the path here instead of at zero.
    pub min_lambda: f64,
}

/// Affine law on the current support plus the inactive correlations
/// `c_j(lam) = c0_j + lam c1_j`, where `c = X'(y - X b(lam)) / n`.
struct Segment {
    a: Vec<f64>,
    b: Vec<f64>,
    inactive: Vec<usize>,
    c0: Vec<f64>,
    c1: Vec<f64>,
}

fn affine_law(problem: &LassoProblem, support: &SupportSet) -> Result<Segment> {
    let gram = problem.gram();
    let q = problem.xty();
    let n = problem.n() as f64;
    let idx = support.indices();
    let (a, b) = if idx.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let chol = Cholesky::factor(&gram.principal(idx)).ok_or_else(|| Error::Singular {
            support: idx.to_vec(),
        })?;
        let qs: Vec<f64> = idx.iter().map(|&j| q[j]).collect();
        let ns: Vec<f64> = support.signs().iter().map(|&s| -n * f64::from(s)).collect();
        (chol.solve(&qs), chol.solve(&ns))
    };
    let inactive: Vec<usize> = (0..problem.p()).filter(|j| !support.contains(*j)).collect();
    let mut c0 = Vec::with_capacity(inactive.len());
    let mut c1 = Vec::with_capacity(inactive.len());
    for &j in &inactive {
        let row = gram.row(j);
        let ga: f64 = idx.iter().zip(&a).map(|(&l, al)| row[l] * al).sum();
        let gb: f64 = idx.iter().zip(&b).map(|(&l, bl)| row[l] * bl).sum();
        c0.push((q[j] - ga) / n);
        c1.push(-gb / n);
    }
    Ok(Segment {
        a,
        b,
        inactive,
        c0,
        c1,
    })
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    lambda: f64,
    index: usize,
    kind: PathEventKind,
    sign: i8,
}

/// Exact Lasso path by homotopy in lambda from `lambda_max` down to
/// `opts.min_lambda`. Between kinks the active coefficients are
/// `a + lam b` with `a = (X_S'X_S)^{-1} X_S'y` and
/// `b = -n (X_S'X_S)^{-1} sign(b_S)`; the next kink is the largest lambda
/// at which an inactive correlation reaches the boundary or, in full mode,
/// an active coefficient reaches zero. Simultaneous events are applied one
/// per loop, lowest index first, through zero-length segments.
pub fn solve_path(problem: &LassoProblem, opts: &PathOptions) -> Result<RegPath> {
    let floor = opts.min_lambda;
    if !(floor >= 0.0) || !floor.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "minimum lambda must be finite and nonnegative, got {floor}"
        )));
    }
    let p = problem.p();
    let lam0 = problem.lambda_max();
    let mut path = RegPath {
        p,
        segments: Vec::new(),
        kinks: vec![lam0],
        events: Vec::new(),
        status: PathStatus::Completed,
    };
    if lam0 <= floor {
        return Ok(path);
    }
    let tie = TIE * lam0;
    let cap = 10 * p * problem.n().max(1);
    let mut support = SupportSet::default();
    let mut lam = lam0;
    let mut last_deleted: Option<usize> = None;
    let mut loop_index = 0;

    loop {
        let seg = affine_law(problem, &support)?;
        let mut degenerate = Vec::new();
        let mut candidates = Vec::new();
        for (k, &j) in seg.inactive.iter().enumerate() {
            let (c0, c1) = (seg.c0[k], seg.c1[k]);
            for sign in [1i8, -1] {
                let s = f64::from(sign);
                let den = 1.0 - s * c1;
                if den.abs() <= DEGENERATE && c0.abs() <= DEGENERATE * lam0 {
                    degenerate.push(j);
                    continue;
                }
                if den <= DEGENERATE {
                    continue;
                }
                let at = s * c0 / den;
                if at > lam + tie || (last_deleted == Some(j) && at > lam - tie) {
                    continue;
                }
                candidates.push(Candidate {
                    lambda: at.min(lam),
                    index: j,
                    kind: PathEventKind::Insert,
                    sign,
                });
            }
        }
        degenerate.dedup();
        let insert_best = candidates
            .iter()
            .map(|c| c.lambda)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut deletions = Vec::new();
        for ((&i, &ai), &bi) in support.indices().iter().zip(&seg.a).zip(&seg.b) {
            if bi == 0.0 {
                continue;
            }
            let at = -ai / bi;
            if at < lam - tie && at > floor {
                deletions.push(Candidate {
                    lambda: at,
                    index: i,
                    kind: PathEventKind::Delete,
                    sign: 0,
                });
            }
        }

        if opts.mode == PathMode::InsertionOnly {
            if !degenerate.is_empty() {
                let reason = FailureReason::DegenerateBoundary {
                    indices: degenerate,
                };
                return Ok(fail(path, &support, &seg, loop_index + 1, lam, reason));
            }
            let delete_best = deletions
                .iter()
                .map(|c| c.lambda)
                .fold(f64::NEG_INFINITY, f64::max);
            if delete_best > floor && delete_best > insert_best + tie {
                let index = deletions
                    .iter()
                    .filter(|c| c.lambda >= delete_best - tie)
                    .map(|c| c.index)
                    .min()
                    .expect("nonempty");
                push_segment(&mut path, &support, &seg, lam, delete_best);
                let reason = FailureReason::SignCrossing {
                    index,
                    lambda: delete_best,
                };
                return Ok(fail(
                    path,
                    &support,
                    &seg,
                    loop_index + 1,
                    delete_best,
                    reason,
                ));
            }
            deletions.clear();
            if insert_best > floor {
                let mut tied: Vec<usize> = candidates
                    .iter()
                    .filter(|c| c.lambda >= insert_best - tie)
                    .map(|c| c.index)
                    .collect();
                tied.sort_unstable();
                tied.dedup();
                if tied.len() > 1 {
                    push_segment(&mut path, &support, &seg, lam, insert_best);
                    let reason = FailureReason::SimultaneousEntry { indices: tied };
                    return Ok(fail(
                        path,
                        &support,
                        &seg,
                        loop_index + 1,
                        insert_best,
                        reason,
                    ));
                }
            }
        }

        candidates.extend(deletions);
        let next = candidates
            .iter()
            .map(|c| c.lambda)
            .fold(f64::NEG_INFINITY, f64::max);
        if !(next > floor) {
            push_segment(&mut path, &support, &seg, lam, floor);
            return Ok(path);
        }
        let chosen = *candidates
            .iter()
            .filter(|c| c.lambda >= next - tie)
            .min_by_key(|c| c.index)
            .expect("nonempty");

        loop_index += 1;
        if loop_index > cap {
            return Err(Error::SegmentOverflow(cap));
        }
        push_segment(&mut path, &support, &seg, lam, next);
        lam = lam.min(next);
        match chosen.kind {
            PathEventKind::Insert => {
                support.insert(chosen.index, chosen.sign);
                last_deleted = None;
            }
            PathEventKind::Delete => {
                support.remove(chosen.index);
                last_deleted = Some(chosen.index);
            }
        }
        path.events.push(PathEvent {
            loop_index,
            lambda: lam,
            index: chosen.index,
            kind: chosen.kind,
            support_after: support.clone(),
        });
    }
}

/// Appends the piece `[lo, hi]` unless it has zero length.
fn push_segment(path: &mut RegPath, support: &SupportSet, seg: &Segment, hi: f64, lo: f64) {
    let last = *path.kinks.last().expect("kinks start with lambda_0");
    if !(lo < hi) || !(lo < last) {
        return;
    }
    path.segments.push(PathSegment {
        lambda_hi: hi,
        lambda_lo: lo,
        support: support.clone(),
        intercept: seg.a.clone(),
        slope: seg.b.clone(),
    });
    path.kinks.push(lo);
}

fn fail(
    mut path: RegPath,
    support: &SupportSet,
    seg: &Segment,
    loop_index: usize,
    lambda: f64,
    reason: FailureReason,
) -> RegPath {
    let boundary_ratio: Vec<f64> = seg
        .c0
        .iter()
        .zip(&seg.c1)
        .map(|(c0, c1)| (c0 + lambda * c1) / lambda)
        .collect();
    let named: &[usize] = match &reason {
        FailureReason::SimultaneousEntry { indices }
        | FailureReason::DegenerateBoundary { indices } => indices,
        FailureReason::SignCrossing { .. } => &[],
    };
    let residual = seg
        .inactive
        .iter()
        .zip(&boundary_ratio)
        .filter(|(j, _)| named.contains(j))
        .map(|(_, r)| (r.abs() - 1.0).abs())
        .fold(0.0, f64::max);
    path.status = PathStatus::FailedInsertion(Box::new(InsertionFailure {
        loop_index,
        lambda,
        support: support.clone(),
        inactive: seg.inactive.clone(),
        rhs: seg.c1.clone(),
        boundary_ratio,
        residual,
        reason,
    }));
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::pathwise::eval_path_at;
    use crate::problem::soft_threshold;

    #[test]
    fn scalar_path_has_one_kink() {
        let x = DenseMatrix::new(3, 1, vec![1.0, 2.0, -1.0]).unwrap();
        let prob = LassoProblem::new(x, vec![2.0, 3.0, 0.5], 0.1).unwrap();
        let path = solve_path(&prob, &PathOptions::default()).unwrap();
        assert!(path.completed());
        assert_eq!(path.segments.len(), 1);
        assert_eq!(path.kinks, vec![2.5, 0.0]);
        for lam in [0.0, 0.7, 2.0, 2.5] {
            let b = eval_path_at(&path, lam).unwrap()[0];
            let want = soft_threshold(7.5, 3.0 * lam).unwrap() / 6.0;
            assert!((b - want).abs() < 1e-12, "{lam}: {b} vs {want}");
        }
    }

    #[test]
    fn identity_design_matches_soft_threshold() {
        let y = vec![3.0, -0.5, -2.0, 1.0];
        let prob = LassoProblem::new(DenseMatrix::identity(4), y.clone(), 0.1).unwrap();
        let path = solve_path(&prob, &PathOptions::default()).unwrap();
        assert_eq!(path.kinks, vec![0.75, 0.5, 0.25, 0.125, 0.0]);
        let order: Vec<usize> = path.events.iter().map(|e| e.index).collect();
        assert_eq!(order, vec![0, 2, 3, 1]);
        for lam in [0.6, 0.3, 0.2, 0.01] {
            let b = eval_path_at(&path, lam).unwrap();
            for (bj, yj) in b.iter().zip(&y) {
                assert!((bj - soft_threshold(*yj, 4.0 * lam).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn equal_correlations_enter_through_zero_length_segment() {
        let y = vec![2.0, -2.0, 1.0];
        let prob = LassoProblem::new(DenseMatrix::identity(3), y, 0.1).unwrap();
        let full = solve_path(&prob, &PathOptions::default()).unwrap();
        assert!(full.completed());
        assert_eq!(full.events[0].index, 0);
        assert_eq!(full.events[1].index, 1);
        assert_eq!(full.events[0].lambda, full.events[1].lambda);
        let opts = PathOptions {
            mode: PathMode::InsertionOnly,
            ..Default::default()
        };
        let ins = solve_path(&prob, &opts).unwrap();
        let fail = ins.failure().unwrap();
        assert_eq!(fail.loop_index, 1);
        assert_eq!(
            fail.reason,
            FailureReason::SimultaneousEntry {
                indices: vec![0, 1]
            }
        );
    }

    #[test]
    fn min_lambda_truncates() {
        let prob = LassoProblem::new(DenseMatrix::identity(2), vec![2.0, 1.0], 0.1).unwrap();
        let opts = PathOptions {
            min_lambda: 0.6,
            ..Default::default()
        };
        let path = solve_path(&prob, &opts).unwrap();
        assert_eq!(path.kinks, vec![1.0, 0.6]);
        assert!(eval_path_at(&path, 0.5).is_err());
    }

    #[test]
    fn zero_response_gives_trivial_path() {
        let prob = LassoProblem::new(DenseMatrix::identity(2), vec![0.0, 0.0], 0.1).unwrap();
        let path = solve_path(&prob, &PathOptions::default()).unwrap();
        assert_eq!(path.kinks, vec![0.0]);
        assert_eq!(eval_path_at(&path, 0.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn deletion_occurs_on_correlated_design() {
        // Classic example where a coefficient returns to zero.
        let x = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.6],
            vec![0.0, 1.0, 0.8],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let prob = LassoProblem::new(x, vec![0.9, 0.6, 0.0], 0.1).unwrap();
        let path = solve_path(&prob, &PathOptions::default()).unwrap();
        assert!(path.completed());
        for seg in &path.segments {
            let mid = 0.5 * (seg.lambda_hi + seg.lambda_lo);
            let beta = seg.beta_at(mid, 3);
            assert!(prob.with_lambda(mid).unwrap().kkt_residual(&beta).unwrap() < 1e-12);
        }
    }
}
