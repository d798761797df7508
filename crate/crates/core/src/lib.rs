//! Lasso estimation `min_b ||y - Xb||^2 / (2n) + lambda ||b||_1`.
//!
//! Solvers: proximal gradient ([`solvers::solve_ista`]), its accelerated
//! form ([`solvers::solve_fista`]), cyclic coordinate descent
//! ([`solvers::solve_cgda`]), accelerated descent on a smoothed penalty
//! ([`solvers::solve_sla`]), the exact homotopy path
//! ([`pathwise::solve_path`]) and least angle regression
//! ([`pathwise::solve_lars`]). [`verify`] holds the reference solver and the
//! convergence-rate checks; [`cli`] is the `lassolab` binary.

// Negated comparisons are deliberate: they reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod csvio;
pub mod datagen;
pub mod descent;
pub mod error;
pub mod linalg;
pub mod pathwise;
pub mod problem;
pub mod solvers;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use problem::{LassoProblem, SurrogateParams};
