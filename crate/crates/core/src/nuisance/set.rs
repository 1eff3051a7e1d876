//! Fitted nuisance bundles and their evaluation interface.

use serde::{Deserialize, Serialize};

use crate::data::{FeatureMap, MissingnessRegime, ObservedSample};
use crate::error::{Error, Result};
use crate::numerics::{LinearModel, LogisticFit};

/// Treatment arm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Control,
    Treated,
}

impl Arm {
    #[inline]
    pub fn matches(&self, a: bool) -> bool {
        matches!(self, Arm::Treated) == a
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Arm::Control => "control",
            Arm::Treated => "treated",
        }
    }

    #[inline]
    fn idx(&self) -> usize {
        match self {
            Arm::Control => 0,
            Arm::Treated => 1,
        }
    }
}

/// Evaluation interface consumed by the influence functions.
///
/// `mu0`/`gamma_r0` read the sample's observed post-treatment outcome when
/// the regime makes the pre-treatment mechanism outcome-dependent, and
/// symmetrically for `mu1`/`gamma_r1`. Probability evaluations are returned
/// already clipped by implementations that estimate them.
pub trait Nuisances {
    /// Pre-treatment outcome regression, by arm.
    fn mu0(&self, s: &ObservedSample, arm: Arm) -> Result<f64>;
    /// Post-treatment outcome regression, by arm.
    fn mu1(&self, s: &ObservedSample, arm: Arm) -> Result<f64>;
    /// Propensity score.
    fn pi(&self, s: &ObservedSample) -> Result<f64>;
    /// Probability that the pre-treatment outcome is observed, by arm.
    fn gamma_r0(&self, s: &ObservedSample, arm: Arm) -> Result<f64>;
    /// Probability that the post-treatment outcome is observed, by arm.
    fn gamma_r1(&self, s: &ObservedSample, arm: Arm) -> Result<f64>;
    /// Nested regression evaluated at the control arm.
    fn eta(&self, s: &ObservedSample) -> Result<f64>;

    /// Convergence diagnostics, when the implementation fits models.
    fn fit_flags(&self) -> Vec<FitFlag> {
        Vec::new()
    }
}

/// Convergence record for one fitted probability model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitFlag {
    pub nuisance: String,
    pub converged: bool,
    /// One-class labels or a fully saturated fit.
    pub separated: bool,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl FitFlag {
    pub fn from_fit(nuisance: impl Into<String>, fit: &LogisticFit) -> Self {
        Self {
            nuisance: nuisance.into(),
            converged: fit.converged,
            separated: fit.separated,
            iterations: fit.iterations,
            grad_norm: fit.grad_norm,
        }
    }

    pub fn healthy(&self) -> bool {
        self.converged && !self.separated
    }
}

/// A fitted regression together with the feature map that feeds it.
#[derive(Debug, Clone)]
pub struct FittedCurve {
    pub model: LinearModel,
    pub map: FeatureMap,
}

impl FittedCurve {
    pub fn evaluate(&self, s: &ObservedSample) -> Result<f64> {
        self.model.predict_row(&self.map.apply(s, None)?)
    }
}

/// A fitted probability model together with its feature map.
#[derive(Debug, Clone)]
pub struct FittedProb {
    pub fit: LogisticFit,
    pub map: FeatureMap,
}

impl FittedProb {
    pub fn evaluate_raw(&self, s: &ObservedSample) -> Result<f64> {
        self.fit.model.predict_row(&self.map.apply(s, None)?)
    }
}

/// Every nuisance a regime's influence function needs, fitted on a training
/// complement. Immutable once built; safe to share across threads.
#[derive(Debug, Clone)]
pub struct NuisanceSet {
    pub(crate) regime: MissingnessRegime,
    pub(crate) clip_xi: f64,
    pub(crate) mu0: [Option<FittedCurve>; 2],
    pub(crate) mu1: [Option<FittedCurve>; 2],
    pub(crate) pi: FittedProb,
    pub(crate) gamma0: [Option<FittedProb>; 2],
    pub(crate) gamma1: [Option<FittedProb>; 2],
    pub(crate) eta: Option<FittedCurve>,
    pub(crate) flags: Vec<FitFlag>,
}

impl NuisanceSet {
    pub fn regime(&self) -> MissingnessRegime {
        self.regime
    }

    pub fn clip_xi(&self) -> f64 {
        self.clip_xi
    }

    #[inline]
    fn clip(&self, p: f64) -> f64 {
        p.clamp(self.clip_xi, 1.0 - self.clip_xi)
    }

    fn curve(&self, slot: &Option<FittedCurve>, what: &str, s: &ObservedSample) -> Result<f64> {
        match slot {
            Some(c) => c.evaluate(s),
            None => Err(Error::MissingInput(format!(
                "{what} is not fitted under regime {}",
                self.regime
            ))),
        }
    }

    fn prob(&self, slot: &Option<FittedProb>, what: &str, s: &ObservedSample) -> Result<f64> {
        match slot {
            Some(p) => Ok(self.clip(p.evaluate_raw(s)?)),
            None => Err(Error::MissingInput(format!(
                "{what} is not fitted under regime {}",
                self.regime
            ))),
        }
    }
}

impl Nuisances for NuisanceSet {
    fn mu0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        self.curve(&self.mu0[arm.idx()], "mu0", s)
    }

    fn mu1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        self.curve(&self.mu1[arm.idx()], "mu1", s)
    }

    fn pi(&self, s: &ObservedSample) -> Result<f64> {
        Ok(self.clip(self.pi.evaluate_raw(s)?))
    }

    fn gamma_r0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        self.prob(&self.gamma0[arm.idx()], "gamma_r0", s)
    }

    fn gamma_r1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        self.prob(&self.gamma1[arm.idx()], "gamma_r1", s)
    }

    fn eta(&self, s: &ObservedSample) -> Result<f64> {
        self.curve(&self.eta, "eta", s)
    }

    fn fit_flags(&self) -> Vec<FitFlag> {
        self.flags.clone()
    }
}

/// Selector for [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuisanceKind {
    Mu0(Arm),
    Mu1(Arm),
    Pi,
    GammaR0(Arm),
    GammaR1(Arm),
    Eta,
}

/// Evaluate one nuisance at one sample. Probabilities come back clipped into
/// `[xi, 1 - xi]`.
pub fn evaluate(set: &NuisanceSet, sample: &ObservedSample, which: NuisanceKind) -> Result<f64> {
    match which {
        NuisanceKind::Mu0(arm) => set.mu0(sample, arm),
        NuisanceKind::Mu1(arm) => set.mu1(sample, arm),
        NuisanceKind::Pi => set.pi(sample),
        NuisanceKind::GammaR0(arm) => set.gamma_r0(sample, arm),
        NuisanceKind::GammaR1(arm) => set.gamma_r1(sample, arm),
        NuisanceKind::Eta => set.eta(sample),
    }
}
