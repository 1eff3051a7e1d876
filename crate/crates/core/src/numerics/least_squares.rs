//! Weighted least squares via column-pivoted Householder QR.
//!
//! Normal equations square the condition number, which matters here because
//! covariate transforms such as `(z2 + z4 + 20)^2` put columns on wildly
//! different scales. The solver factors the (row-weighted) design directly
//! and declares rank deficiency from the pivoted R diagonal.

use crate::error::{Error, Result};
use crate::numerics::matrix::{DesignMatrix, LinearModel, Link};

/// Relative tolerance on the pivoted R diagonal used for rank detection.
const RANK_RTOL: f64 = 1e-10;

/// Solve `min_b || diag(sqrt(w)) (X b - y) ||^2`.
///
/// `weights = None` means ordinary least squares. Weights must be
/// non-negative and not all zero. Errors with [`Error::RankDeficient`] when
/// the weighted design loses full column rank.
pub fn solve_least_squares(
    design: &DesignMatrix,
    response: &[f64],
    weights: Option<&[f64]>,
) -> Result<LinearModel> {
    let n = design.rows();
    let p = design.cols();
    if response.len() != n {
        return Err(Error::DimensionMismatch {
            context: "least-squares response length",
            expected: n,
            got: response.len(),
        });
    }
    let mut sqrt_w = vec![1.0_f64; n];
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                context: "least-squares weight length",
                expected: n,
                got: w.len(),
            });
        }
        let mut total = 0.0;
        for (i, &wi) in w.iter().enumerate() {
            if !wi.is_finite() || wi < 0.0 {
                return Err(Error::ConsistencyError {
                    row: Some(i),
                    msg: format!("invalid weight {wi}"),
                });
            }
            total += wi;
            sqrt_w[i] = wi.sqrt();
        }
        if total == 0.0 {
            return Err(Error::ConsistencyError {
                row: None,
                msg: "weights are all zero".into(),
            });
        }
    }

    // Row-weighted copies of the design and response.
    let mut a = vec![0.0_f64; n * p];
    let mut b = vec![0.0_f64; n];
    for i in 0..n {
        let r = design.row(i);
        for j in 0..p {
            a[i * p + j] = sqrt_w[i] * r[j];
        }
        b[i] = sqrt_w[i] * response[i];
    }

    let coef = qr_solve(&mut a, &mut b, n, p, design.column_names())?;
    LinearModel::new(coef, Link::Identity)
}

/// Column-pivoted Householder QR solve of the (already weighted) system.
fn qr_solve(a: &mut [f64], b: &mut [f64], n: usize, p: usize, names: &[String]) -> Result<Vec<f64>> {
    let mut perm: Vec<usize> = (0..p).collect();
    let mut r_diag_max = 0.0_f64;

    for k in 0..p {
        // Pivot on the column with the largest remaining norm.
        let mut best = k;
        let mut best_norm = 0.0;
        for j in k..p {
            let mut s = 0.0;
            for i in k..n {
                let v = a[i * p + j];
                s += v * v;
            }
            if s > best_norm {
                best_norm = s;
                best = j;
            }
        }
        if best != k {
            for i in 0..n {
                a.swap(i * p + k, i * p + best);
            }
            perm.swap(k, best);
        }

        // Householder reflector for column k.
        let mut norm = 0.0;
        for i in k..n {
            let v = a[i * p + k];
            norm += v * v;
        }
        let norm = norm.sqrt();
        let diag = if a[k * p + k] >= 0.0 { -norm } else { norm };

        r_diag_max = r_diag_max.max(norm);
        if norm <= RANK_RTOL * r_diag_max || norm == 0.0 {
            return Err(Error::RankDeficient {
                column: perm[k],
                name: names.get(perm[k]).cloned().unwrap_or_default(),
            });
        }

        // v = x - diag * e1, applied implicitly.
        let beta = 1.0 / (diag * (diag - a[k * p + k]));
        a[k * p + k] -= diag;

        for j in (k + 1)..p {
            let mut dot = 0.0;
            for i in k..n {
                dot += a[i * p + k] * a[i * p + j];
            }
            let scale = beta * dot;
            for i in k..n {
                a[i * p + j] -= scale * a[i * p + k];
            }
        }
        let mut dot = 0.0;
        for i in k..n {
            dot += a[i * p + k] * b[i];
        }
        let scale = beta * dot;
        for i in k..n {
            b[i] -= scale * a[i * p + k];
        }

        a[k * p + k] = diag;
    }

    // Back substitution on the permuted system.
    let mut x_perm = vec![0.0_f64; p];
    for k in (0..p).rev() {
        let mut s = b[k];
        for j in (k + 1)..p {
            s -= a[k * p + j] * x_perm[j];
        }
        x_perm[k] = s / a[k * p + k];
    }

    let mut x = vec![0.0_f64; p];
    for k in 0..p {
        x[perm[k]] = x_perm[k];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteResult("least-squares solution"));
    }
    Ok(x)
}
