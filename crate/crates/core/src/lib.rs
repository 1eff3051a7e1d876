//! Two-period difference-in-differences ATT estimation when pre-treatment,
//! post-treatment, or both outcomes are missing at random.
//!
//! The estimators solve cross-fitted influence-function estimating
//! equations, are multiply robust to nuisance misspecification, and come
//! with plug-in variance and confidence intervals. A seeded Monte Carlo
//! laboratory generates the synthetic benchmark, sweeps correct/misspecified
//! nuisance grids, and writes replication-level and summary reports.
//!
//! Layout:
//! - [`numerics`] — least squares, IRLS logistic regression, seeded RNG;
//! - [`data`] — sample schema, CSV I/O, fold planning, feature maps;
//! - [`nuisance`] — outcome/propensity/missingness/nested regression fits;
//! - [`estimators`] — influence functions and the cross-fitted solver;
//! - [`simulation`] — the synthetic benchmark and sweep driver.

pub mod data;
pub mod error;
pub mod estimators;
pub mod numerics;
pub mod nuisance;
pub mod simulation;

pub use data::{Dataset, FeatureMap, MissingnessRegime, ObservedSample};
pub use error::{Error, Result};
pub use estimators::{cross_fit_att, EstimateResult, EstimatorConfig};
pub use nuisance::{EtaMode, NuisanceSpec};
pub use simulation::{run_monte_carlo, MonteCarloConfig, ScenarioSpec, SimulationReport};
