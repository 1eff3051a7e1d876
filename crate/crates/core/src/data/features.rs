//! Feature maps: pure functions from a sample to a model input vector.
//!
//! A map either selects raw covariate columns or applies the named
//! nonlinear covariate transform used by the simulation study, and may
//! additionally feed an observed outcome to the model (needed when the
//! missingness mechanism depends on it). An intercept column is always
//! prepended.

use serde::{Deserialize, Serialize};

use crate::data::sample::ObservedSample;
use crate::error::{Error, Result};

/// Covariate part of a feature map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum XFeatures {
    /// Select covariate columns by index.
    RawColumns(Vec<usize>),
    /// Treat the four given columns as latent draws `(z1..z4)` and emit the
    /// nonlinear observed covariates: `exp(z1/2)`, `z2/(1+exp(z1)) + 10`,
    /// `(z1*z3/25 + 0.6)^3`, `(z2+z4+20)^2`.
    ZToX { cols: [usize; 4] },
}

/// Outcome input consumed by the map, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeFeature {
    None,
    /// Append the post-treatment outcome y1.
    PostOutcome,
    /// Append the pre-treatment outcome y0.
    PreOutcome,
}

/// A fixed-dimension, pure feature map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub x_part: XFeatures,
    pub outcome: OutcomeFeature,
}

impl FeatureMap {
    pub fn raw(cols: Vec<usize>) -> Self {
        Self { x_part: XFeatures::RawColumns(cols), outcome: OutcomeFeature::None }
    }

    pub fn z_to_x(cols: [usize; 4]) -> Self {
        Self { x_part: XFeatures::ZToX { cols }, outcome: OutcomeFeature::None }
    }

    pub fn with_outcome(mut self, outcome: OutcomeFeature) -> Self {
        self.outcome = outcome;
        self
    }

    /// Output dimension including the intercept.
    pub fn output_dim(&self) -> usize {
        let x = match &self.x_part {
            XFeatures::RawColumns(cols) => cols.len(),
            XFeatures::ZToX { .. } => 4,
        };
        1 + x + usize::from(self.outcome != OutcomeFeature::None)
    }

    /// Largest covariate index consumed, for validation against a dataset.
    pub fn max_column(&self) -> usize {
        match &self.x_part {
            XFeatures::RawColumns(cols) => cols.iter().copied().max().unwrap_or(0),
            XFeatures::ZToX { cols } => cols.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn column_labels(&self) -> Vec<String> {
        let mut labels = vec!["intercept".to_string()];
        match &self.x_part {
            XFeatures::RawColumns(cols) => {
                labels.extend(cols.iter().map(|c| format!("x[{c}]")));
            }
            XFeatures::ZToX { .. } => {
                labels.extend(["x1", "x2", "x3", "x4"].iter().map(|s| s.to_string()));
            }
        }
        match self.outcome {
            OutcomeFeature::None => {}
            OutcomeFeature::PostOutcome => labels.push("y1".into()),
            OutcomeFeature::PreOutcome => labels.push("y0".into()),
        }
        labels
    }

    /// Build the feature vector for one sample. `extra` overrides the
    /// outcome input, allowing evaluation at a counterfactual outcome value.
    pub fn apply(&self, sample: &ObservedSample, extra: Option<f64>) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.output_dim());
        out.push(1.0);
        match &self.x_part {
            XFeatures::RawColumns(cols) => {
                for &c in cols {
                    let v = sample.x.get(c).copied().ok_or(Error::MissingInput(format!(
                        "covariate column {c} out of range (p = {})",
                        sample.x.len()
                    )))?;
                    out.push(v);
                }
            }
            XFeatures::ZToX { cols } => {
                let z: Vec<f64> = cols
                    .iter()
                    .map(|&c| {
                        sample.x.get(c).copied().ok_or(Error::MissingInput(format!(
                            "covariate column {c} out of range (p = {})",
                            sample.x.len()
                        )))
                    })
                    .collect::<Result<_>>()?;
                out.extend_from_slice(&z_to_x_transform(&[z[0], z[1], z[2], z[3]]));
            }
        }
        match self.outcome {
            OutcomeFeature::None => {}
            OutcomeFeature::PostOutcome => {
                let v = extra.or(sample.y1).ok_or(Error::MissingInput(
                    "feature map needs y1 but r1 = 0".into(),
                ))?;
                out.push(v);
            }
            OutcomeFeature::PreOutcome => {
                let v = extra.or(sample.y0).ok_or(Error::MissingInput(
                    "feature map needs y0 but r0 = 0".into(),
                ))?;
                out.push(v);
            }
        }
        Ok(out)
    }
}

/// The nonlinear covariate transform of the simulation design.
pub fn z_to_x_transform(z: &[f64; 4]) -> [f64; 4] {
    [
        (z[0] / 2.0).exp(),
        z[1] / (1.0 + z[0].exp()) + 10.0,
        (z[0] * z[2] / 25.0 + 0.6).powi(3),
        (z[1] + z[3] + 20.0).powi(2),
    ]
}

/// Convenience alias for [`FeatureMap::apply`] mirroring the operation name.
pub fn apply_feature_map(
    map: &FeatureMap,
    sample: &ObservedSample,
    extra: Option<f64>,
) -> Result<Vec<f64>> {
    map.apply(sample, extra)
}
