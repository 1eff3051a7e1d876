//! Sample schema and dataset container.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which outcome can be missing, and whether the missingness mechanism may
/// depend on the opposite-period outcome ("hard") or only on covariates and
/// treatment ("simple").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingnessRegime {
    /// Pre-treatment outcome missing; missingness independent of outcomes
    /// given covariates and treatment.
    PreSimple,
    /// Pre-treatment outcome missing; missingness may depend on the observed
    /// post-treatment outcome.
    PreHard,
    /// Post-treatment outcome missing; covariate/treatment-driven.
    PostSimple,
    /// Post-treatment outcome missing; may depend on the pre-treatment outcome.
    PostHard,
    /// Both outcomes missing at random given covariates and treatment.
    BothSimple,
}

impl MissingnessRegime {
    pub const ALL: [MissingnessRegime; 5] = [
        MissingnessRegime::PreSimple,
        MissingnessRegime::PreHard,
        MissingnessRegime::PostSimple,
        MissingnessRegime::PostHard,
        MissingnessRegime::BothSimple,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MissingnessRegime::PreSimple => "pre-simple",
            MissingnessRegime::PreHard => "pre-hard",
            MissingnessRegime::PostSimple => "post-simple",
            MissingnessRegime::PostHard => "post-hard",
            MissingnessRegime::BothSimple => "both-simple",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pre-simple" => Ok(MissingnessRegime::PreSimple),
            "pre-hard" => Ok(MissingnessRegime::PreHard),
            "post-simple" => Ok(MissingnessRegime::PostSimple),
            "post-hard" => Ok(MissingnessRegime::PostHard),
            "both" | "both-simple" => Ok(MissingnessRegime::BothSimple),
            other => Err(Error::InvalidConfig(format!("unknown regime '{other}'"))),
        }
    }

    /// Pre-treatment outcome can be missing.
    pub fn pre_missing(&self) -> bool {
        matches!(
            self,
            MissingnessRegime::PreSimple | MissingnessRegime::PreHard | MissingnessRegime::BothSimple
        )
    }

    /// Post-treatment outcome can be missing.
    pub fn post_missing(&self) -> bool {
        matches!(
            self,
            MissingnessRegime::PostSimple | MissingnessRegime::PostHard | MissingnessRegime::BothSimple
        )
    }

    /// The missingness mechanism may depend on the opposite-period outcome,
    /// which brings the nested regression into play.
    pub fn is_hard(&self) -> bool {
        matches!(self, MissingnessRegime::PreHard | MissingnessRegime::PostHard)
    }
}

impl std::fmt::Display for MissingnessRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One unit's record: covariates, treatment, missingness indicators, and the
/// observed outcomes. An outcome is present exactly when its indicator is 1;
/// missing outcomes are stored as absent, never as sentinel numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedSample {
    pub x: Vec<f64>,
    pub a: bool,
    pub r0: bool,
    pub y0: Option<f64>,
    pub r1: bool,
    pub y1: Option<f64>,
}

impl ObservedSample {
    pub fn new(
        x: Vec<f64>,
        a: bool,
        r0: bool,
        y0: Option<f64>,
        r1: bool,
        y1: Option<f64>,
    ) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::ConsistencyError { row: None, msg: "non-finite covariate".into() });
        }
        if r0 != y0.is_some() {
            return Err(Error::ConsistencyError {
                row: None,
                msg: "y0 must be present exactly when r0 = 1".into(),
            });
        }
        if r1 != y1.is_some() {
            return Err(Error::ConsistencyError {
                row: None,
                msg: "y1 must be present exactly when r1 = 1".into(),
            });
        }
        if let Some(v) = y0 {
            if !v.is_finite() {
                return Err(Error::ConsistencyError { row: None, msg: "non-finite y0".into() });
            }
        }
        if let Some(v) = y1 {
            if !v.is_finite() {
                return Err(Error::ConsistencyError { row: None, msg: "non-finite y1".into() });
            }
        }
        Ok(Self { x, a, r0, y0, r1, y1 })
    }

    #[inline]
    pub fn a_f64(&self) -> f64 {
        if self.a { 1.0 } else { 0.0 }
    }
}

/// An i.i.d. sample of observed records under one missingness regime.
#[derive(Debug, Clone)]
pub struct Dataset {
    samples: Vec<ObservedSample>,
    p: usize,
    regime: MissingnessRegime,
    column_names: Vec<String>,
}

impl Dataset {
    /// Validates shared covariate dimension, regime consistency (a regime
    /// that fixes an indicator to 1 must see it equal to 1 everywhere), and
    /// that both treatment arms are populated.
    pub fn new(
        samples: Vec<ObservedSample>,
        regime: MissingnessRegime,
        column_names: Vec<String>,
    ) -> Result<Self> {
        let p = samples.first().map_or(0, |s| s.x.len());
        if p == 0 {
            return Err(Error::SchemaError("dataset needs at least one covariate and one row".into()));
        }
        if column_names.len() != p {
            return Err(Error::DimensionMismatch {
                context: "dataset column names",
                expected: p,
                got: column_names.len(),
            });
        }
        let mut treated = 0usize;
        let mut control = 0usize;
        for (i, s) in samples.iter().enumerate() {
            if s.x.len() != p {
                return Err(Error::DimensionMismatch {
                    context: "covariate dimension",
                    expected: p,
                    got: s.x.len(),
                });
            }
            if !regime.pre_missing() && !s.r0 {
                return Err(Error::ConsistencyError {
                    row: Some(i),
                    msg: format!("regime {regime} requires r0 = 1 everywhere"),
                });
            }
            if !regime.post_missing() && !s.r1 {
                return Err(Error::ConsistencyError {
                    row: Some(i),
                    msg: format!("regime {regime} requires r1 = 1 everywhere"),
                });
            }
            if s.a {
                treated += 1;
            } else {
                control += 1;
            }
        }
        if treated == 0 {
            return Err(Error::EmptyGroup("no treated units".into()));
        }
        if control == 0 {
            return Err(Error::EmptyGroup("no control units".into()));
        }
        Ok(Self { samples, p, regime, column_names })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn regime(&self) -> MissingnessRegime {
        self.regime
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    #[inline]
    pub fn sample(&self, i: usize) -> &ObservedSample {
        &self.samples[i]
    }

    pub fn samples(&self) -> &[ObservedSample] {
        &self.samples
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }
}
