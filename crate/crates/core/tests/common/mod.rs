#![allow(dead_code)]

use lassolab::datagen::{lasso_instance, GenSpec, GeneratedData};
use lassolab::linalg::DenseMatrix;
use lassolab::LassoProblem;

/// Seeds of the regression corpus.
pub const CORPUS_SEEDS: std::ops::RangeInclusive<u64> = 1..=20;

/// n = 50, p = 20, five nonzeros, noise 0.5, lambda = 0.1 lambda_max.
pub fn corpus(seed: u64) -> (GeneratedData, LassoProblem) {
    lasso_instance(&GenSpec::new(50, 20, 5, 0.5, seed), 0.1).unwrap()
}

/// Same draws with unit-norm columns.
pub fn corpus_standardized(seed: u64) -> (GeneratedData, LassoProblem) {
    let spec = GenSpec {
        standardize: true,
        ..GenSpec::new(50, 20, 5, 0.5, seed)
    };
    lasso_instance(&spec, 0.1).unwrap()
}

/// n = 60, p = 15 instances for path checks.
pub fn path_corpus(seed: u64) -> LassoProblem {
    lasso_instance(&GenSpec::new(60, 15, 5, 0.5, seed), 0.1)
        .unwrap()
        .1
}

/// `n x p` matrix with orthonormal columns from a seeded Gaussian draw.
pub fn orthonormal_design(n: usize, p: usize, seed: u64) -> DenseMatrix {
    let g = lassolab::datagen::gen_linear(&GenSpec::new(n, p, 0, 0.0, seed))
        .unwrap()
        .x;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..p {
        let mut v = g.column(j);
        for _ in 0..2 {
            for u in &cols {
                let r: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= r * ui);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        cols.push(v);
    }
    DenseMatrix::from_columns(&cols).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
