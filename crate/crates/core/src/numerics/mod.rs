//! Minimal dense linear-algebra and model-fitting kernel.
//!
//! Everything upstream (nuisance fitting, influence functions, the Monte
//! Carlo laboratory) reduces to three primitives: weighted least squares,
//! logistic regression via IRLS, and a seeded random source. All operations
//! are pure functions of their inputs; the types are immutable once built
//! and safe to share across threads.

mod least_squares;
mod logistic;
mod matrix;
mod rng;

pub use least_squares::solve_least_squares;
pub use logistic::{fit_logistic, LogisticFit, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use matrix::{logit, predict, sigmoid, DesignMatrix, LinearModel, Link};
pub use rng::{draws, DrawDistribution, RandomSource};
