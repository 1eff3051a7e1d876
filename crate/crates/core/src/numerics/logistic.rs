//! Logistic regression by iteratively reweighted least squares.

use crate::error::{Error, Result};
use crate::numerics::least_squares::solve_least_squares;
use crate::numerics::matrix::{sigmoid, DesignMatrix, LinearModel, Link};

/// Default IRLS iteration cap.
pub const DEFAULT_MAX_ITER: usize = 100;
/// Default convergence tolerance on the score (gradient) norm.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Floor on fitted probabilities inside the working weights.
const WEIGHT_FLOOR: f64 = 1e-10;

/// Outcome of a logistic fit. Separation or slow convergence does not abort:
/// the last iterate is returned and flagged.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub model: LinearModel,
    /// Score norm dropped below tolerance.
    pub converged: bool,
    /// The likelihood has no interior maximum: one-class labels, or every
    /// fitted probability saturated at 0/1. The gradient criterion can still
    /// fire in that case, so this is tracked separately.
    pub separated: bool,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl LogisticFit {
    /// Converged to an interior maximum.
    pub fn healthy(&self) -> bool {
        self.converged && !self.separated
    }
}

/// Fit a logistic regression of binary `labels` on `design`.
///
/// Labels must be 0/1. Maximizes the Bernoulli log-likelihood under the logit
/// link; convergence is declared when the score norm drops below `tol`.
pub fn fit_logistic(
    design: &DesignMatrix,
    labels: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<LogisticFit> {
    let n = design.rows();
    let p = design.cols();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            context: "logistic label length",
            expected: n,
            got: labels.len(),
        });
    }
    if let Some(bad) = labels.iter().position(|&y| y != 0.0 && y != 1.0) {
        return Err(Error::ConsistencyError {
            row: Some(bad),
            msg: format!("label {} is not 0/1", labels[bad]),
        });
    }
    if max_iter == 0 || tol <= 0.0 || tol.is_nan() {
        return Err(Error::InvalidConfig(
            "logistic fit needs max_iter >= 1 and tol > 0".into(),
        ));
    }

    let one_class = labels.iter().all(|&y| y == 1.0) || labels.iter().all(|&y| y == 0.0);

    let mut beta = vec![0.0_f64; p];
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=max_iter {
        iterations = it;
        let mut w = vec![0.0_f64; n];
        let mut z = vec![0.0_f64; n];
        let mut grad = vec![0.0_f64; p];

        for i in 0..n {
            let row = design.row(i);
            let lp: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
            let pi = sigmoid(lp);
            let wi = (pi * (1.0 - pi)).max(WEIGHT_FLOOR);
            w[i] = wi;
            z[i] = lp + (labels[i] - pi) / wi;
            for j in 0..p {
                grad[j] += (labels[i] - pi) * row[j];
            }
        }

        grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm <= tol {
            converged = true;
            iterations = it - 1;
            break;
        }

        match solve_least_squares(design, &z, Some(&w)) {
            Ok(step) => beta = step.coefficients,
            // Degenerate working weights (separation) can sink the effective
            // rank mid-path; keep the last iterate and flag it.
            Err(_) if it > 1 => break,
            Err(e) => return Err(e),
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFiniteResult("logistic IRLS step"));
        }
    }

    // Complete separation: every final linear predictor is saturated, so
    // all fitted probabilities sit on the boundary at double precision.
    let min_abs_lp = (0..n)
        .map(|i| {
            design
                .row(i)
                .iter()
                .zip(&beta)
                .map(|(x, b)| x * b)
                .sum::<f64>()
                .abs()
        })
        .fold(f64::INFINITY, f64::min);
    let separated = one_class || min_abs_lp > 30.0;

    let model = LinearModel::new(beta, Link::Logit)?;
    Ok(LogisticFit { model, converged, separated, iterations, grad_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::logit;
    use crate::numerics::rng::RandomSource;

    #[test]
    fn intercept_only_recovers_logit_of_mean() {
        let design = DesignMatrix::from_rows(vec![vec![1.0]; 10]).unwrap();
        let labels = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let fit = fit_logistic(&design, &labels, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert!(fit.converged);
        assert!((fit.model.coefficients[0] - logit(0.3)).abs() < 1e-6);
    }

    #[test]
    fn symmetric_data_gives_zero_intercept() {
        // (x, y) and (-x, 1-y) pairs force the intercept to zero.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (x, y) in [(0.5, 1.0), (1.5, 1.0), (2.5, 0.0), (0.2, 0.0)] {
            rows.push(vec![1.0, x]);
            labels.push(y);
            rows.push(vec![1.0, -x]);
            labels.push(1.0 - y);
        }
        let design = DesignMatrix::from_rows(rows).unwrap();
        let fit = fit_logistic(&design, &labels, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert!(fit.converged);
        assert!(fit.model.coefficients[0].abs() < 1e-7, "intercept {}", fit.model.coefficients[0]);
    }

    #[test]
    fn score_equations_hold_at_convergence() {
        let src = RandomSource::new(3);
        let xs = src.stream(0).normals(60);
        let us = src.stream(1).uniforms(60);
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
        let labels: Vec<f64> = xs
            .iter()
            .zip(&us)
            .map(|(&x, &u)| if u < sigmoid(0.4 + 0.8 * x) { 1.0 } else { 0.0 })
            .collect();
        let design = DesignMatrix::from_rows(rows).unwrap();
        let fit = fit_logistic(&design, &labels, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert!(fit.converged);
        for j in 0..2 {
            let mut score = 0.0;
            for i in 0..design.rows() {
                let p = fit.model.predict_row(design.row(i)).unwrap();
                score += (labels[i] - p) * design.get(i, j);
            }
            assert!(score.abs() <= 1e-6, "score[{j}] = {score}");
        }
    }

    #[test]
    fn one_class_labels_flagged_not_fatal() {
        let design = DesignMatrix::from_rows(vec![vec![1.0]; 8]).unwrap();
        let labels = [1.0; 8];
        let fit = fit_logistic(&design, &labels, 50, 1e-10).unwrap();
        assert!(fit.separated);
        assert!(!fit.healthy());
        // Intercept drifts toward +inf; prediction saturates near 1.
        assert!(fit.model.predict_row(&[1.0]).unwrap() > 0.99);
    }

    /// Lattice oracle: maximize the log-likelihood over a coefficient grid,
    /// coarse pass then 1e-3-step refinement around the coarse optimum. The
    /// log-likelihood is strictly concave, so the refinement brackets the MLE.
    fn lattice_oracle(design: &DesignMatrix, labels: &[f64]) -> (f64, f64) {
        let loglik = |b0: f64, b1: f64| -> f64 {
            (0..design.rows())
                .map(|i| {
                    let lp = b0 * design.get(i, 0) + b1 * design.get(i, 1);
                    let p = sigmoid(lp).clamp(1e-12, 1.0 - 1e-12);
                    if labels[i] == 1.0 { p.ln() } else { (1.0 - p).ln() }
                })
                .sum()
        };
        let mut best = (0.0, 0.0);
        let mut best_ll = f64::NEG_INFINITY;
        let scan = |c0: f64, c1: f64, half: f64, step: f64, best: &mut (f64, f64), best_ll: &mut f64| {
            let m = (half / step).round() as i64;
            for i in -m..=m {
                for j in -m..=m {
                    let b0 = c0 + i as f64 * step;
                    let b1 = c1 + j as f64 * step;
                    let ll = loglik(b0, b1);
                    if ll > *best_ll {
                        *best_ll = ll;
                        *best = (b0, b1);
                    }
                }
            }
        };
        scan(0.0, 0.0, 3.0, 0.05, &mut best, &mut best_ll);
        let coarse = best;
        scan(coarse.0, coarse.1, 0.06, 1e-3, &mut best, &mut best_ll);
        best
    }

    #[test]
    fn matches_lattice_likelihood_oracle() {
        let src = RandomSource::new(19);
        let x1 = src.stream(0).normals(30);
        let x2 = src.stream(1).normals(30);
        let us = src.stream(2).uniforms(30);
        let rows: Vec<Vec<f64>> = x1.iter().zip(&x2).map(|(&a, &b)| vec![a, b]).collect();
        let labels: Vec<f64> = (0..30)
            .map(|i| if us[i] < sigmoid(0.7 * x1[i] - 0.4 * x2[i]) { 1.0 } else { 0.0 })
            .collect();
        let design = DesignMatrix::from_rows(rows).unwrap();

        let fit = fit_logistic(&design, &labels, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert!(fit.converged);
        let (o0, o1) = lattice_oracle(&design, &labels);
        assert!((fit.model.coefficients[0] - o0).abs() < 2e-3, "{} vs {}", fit.model.coefficients[0], o0);
        assert!((fit.model.coefficients[1] - o1).abs() < 2e-3, "{} vs {}", fit.model.coefficients[1], o1);
    }
}
