//! Dense row-major design matrix and fitted linear models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense design matrix with named columns, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    column_names: Vec<String>,
}

impl DesignMatrix {
    /// Build from a flat row-major buffer. Requires `rows >= cols >= 1` and
    /// all entries finite.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, column_names: Vec<String>) -> Result<Self> {
        if cols == 0 || rows < cols {
            return Err(Error::DimensionMismatch {
                context: "design matrix shape (rows >= cols >= 1)",
                expected: cols.max(1),
                got: rows,
            });
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "design matrix buffer",
                expected: rows * cols,
                got: values.len(),
            });
        }
        if column_names.len() != cols {
            return Err(Error::DimensionMismatch {
                context: "design matrix column names",
                expected: cols,
                got: column_names.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::ConsistencyError {
                row: Some(bad / cols),
                msg: format!("non-finite design entry in column {}", bad % cols),
            });
        }
        Ok(Self { rows, cols, values, column_names })
    }

    /// Build from an iterator of rows; column names default to `c0..c{p-1}`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n * p);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != p {
                return Err(Error::DimensionMismatch {
                    context: "design row width",
                    expected: p,
                    got: rows[i].len(),
                });
            }
            values.extend_from_slice(r);
        }
        let names = (0..p).map(|j| format!("c{j}")).collect();
        Self::new(n, p, values, names)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

/// Link function of a fitted linear model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Link {
    Identity,
    Logit,
}

/// Coefficients of a fitted (generalized) linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub link: Link,
}

impl LinearModel {
    pub fn new(coefficients: Vec<f64>, link: Link) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteResult("linear model coefficients"));
        }
        Ok(Self { coefficients, link })
    }

    /// Evaluate the model on one feature row.
    #[inline]
    pub fn predict_row(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                context: "predict feature width",
                expected: self.coefficients.len(),
                got: features.len(),
            });
        }
        let lp: f64 = features
            .iter()
            .zip(&self.coefficients)
            .map(|(x, b)| x * b)
            .sum();
        Ok(match self.link {
            Link::Identity => lp,
            Link::Logit => sigmoid(lp),
        })
    }
}

/// Evaluate a model over every row of a design.
pub fn predict(model: &LinearModel, design: &DesignMatrix) -> Result<Vec<f64>> {
    if design.cols() != model.coefficients.len() {
        return Err(Error::DimensionMismatch {
            context: "predict design width",
            expected: model.coefficients.len(),
            got: design.cols(),
        });
    }
    (0..design.rows()).map(|i| model.predict_row(design.row(i))).collect()
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`sigmoid`] on (0, 1).
#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}
