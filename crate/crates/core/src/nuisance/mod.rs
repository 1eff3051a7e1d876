//! Nuisance function estimation.
//!
//! Fits and evaluates everything the influence functions consume: outcome
//! regressions, the propensity score, missingness probabilities, and the
//! nested regression (plain or augmented). All working models are linear or
//! logistic in feature-map outputs; the [`Nuisances`] trait is the extension
//! point for richer learners, and is also what lets tests inject exact or
//! deliberately perturbed nuisances.
//!
//! An alternative route to the nested regression — expanding the conditional
//! outcome density in an orthonormal basis and integrating the outcome
//! regression against it — is documented in the literature but not
//! implemented here; the regression-based path below covers the estimators'
//! needs.

mod diagnostics;
mod fit;
mod set;
mod spec;

pub use diagnostics::{oracle_diagnostics, OracleDiagnostics};
pub use fit::{fit_nested_augmented, fit_nested_plain, fit_nuisances, OutcomePeriod};
pub use set::{evaluate, Arm, FitFlag, FittedCurve, FittedProb, NuisanceKind, NuisanceSet, Nuisances};
pub use spec::{EtaMode, NuisanceSpec, DEFAULT_CLIP_XI};
