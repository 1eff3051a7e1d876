//! Nuisance model specification.

use serde::{Deserialize, Serialize};

use crate::data::{FeatureMap, MissingnessRegime, OutcomeFeature};
use crate::error::{Error, Result};

/// How the nested regression is learned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaMode {
    /// Regress the fitted outcome regression directly onto covariates.
    Plain,
    /// Regress the inverse-probability-augmented pseudo-outcome, which keeps
    /// the nested regression consistent when the outcome regression is off
    /// but the missingness model is good.
    Augmented,
}

impl EtaMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EtaMode::Plain => "plain",
            EtaMode::Augmented => "augmented",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(EtaMode::Plain),
            "augmented" => Ok(EtaMode::Augmented),
            other => Err(Error::InvalidConfig(format!("unknown eta mode '{other}'"))),
        }
    }
}

/// Default clipping bound for estimated probabilities.
pub const DEFAULT_CLIP_XI: f64 = 0.01;

/// Feature maps and knobs for every nuisance fit.
///
/// The maps carry the covariate part only; under the outcome-dependent
/// ("hard") regimes the fitting code appends the relevant observed outcome
/// to the outcome-regression and missingness-model inputs, entering
/// linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceSpec {
    pub mu_map: FeatureMap,
    pub pi_map: FeatureMap,
    pub gamma_map: FeatureMap,
    pub eta_map: FeatureMap,
    pub eta_mode: EtaMode,
    /// Probabilities are clipped into `[clip_xi, 1 - clip_xi]`.
    pub clip_xi: f64,
}

impl NuisanceSpec {
    /// All nuisances on the same raw covariate columns.
    pub fn raw_columns(cols: Vec<usize>) -> Self {
        Self {
            mu_map: FeatureMap::raw(cols.clone()),
            pi_map: FeatureMap::raw(cols.clone()),
            gamma_map: FeatureMap::raw(cols.clone()),
            eta_map: FeatureMap::raw(cols),
            eta_mode: EtaMode::Augmented,
            clip_xi: DEFAULT_CLIP_XI,
        }
    }

    pub fn with_clip(mut self, clip_xi: f64) -> Self {
        self.clip_xi = clip_xi;
        self
    }

    pub fn with_eta_mode(mut self, mode: EtaMode) -> Self {
        self.eta_mode = mode;
        self
    }

    /// Check the spec against a regime and covariate dimension.
    pub fn validate(&self, regime: MissingnessRegime, p: usize) -> Result<()> {
        if !(self.clip_xi > 0.0 && self.clip_xi < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "clip_xi must lie in (0, 0.5), got {}",
                self.clip_xi
            )));
        }
        for (name, map) in [
            ("mu", &self.mu_map),
            ("pi", &self.pi_map),
            ("gamma", &self.gamma_map),
            ("eta", &self.eta_map),
        ] {
            if map.max_column() >= p {
                return Err(Error::InvalidConfig(format!(
                    "{name} map references covariate column {} but p = {p}",
                    map.max_column()
                )));
            }
        }
        // Outcome inputs on the covariate maps are regime-bound: the
        // missingness model may consume the opposite-period outcome only
        // under the matching hard regime.
        let gamma_outcome_ok = match self.gamma_map.outcome {
            OutcomeFeature::None => true,
            OutcomeFeature::PostOutcome => regime == MissingnessRegime::PreHard,
            OutcomeFeature::PreOutcome => regime == MissingnessRegime::PostHard,
        };
        if !gamma_outcome_ok {
            return Err(Error::InvalidConfig(format!(
                "gamma map outcome input is not allowed under regime {regime}"
            )));
        }
        let mu_outcome_ok = match self.mu_map.outcome {
            OutcomeFeature::None => true,
            OutcomeFeature::PostOutcome => regime == MissingnessRegime::PreHard,
            OutcomeFeature::PreOutcome => regime == MissingnessRegime::PostHard,
        };
        if !mu_outcome_ok {
            return Err(Error::InvalidConfig(format!(
                "mu map outcome input is not allowed under regime {regime}"
            )));
        }
        if self.pi_map.outcome != OutcomeFeature::None || self.eta_map.outcome != OutcomeFeature::None {
            return Err(Error::InvalidConfig(
                "pi and eta maps must not consume outcomes".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_bounds_enforced() {
        let spec = NuisanceSpec::raw_columns(vec![0]).with_clip(0.0);
        assert!(spec.validate(MissingnessRegime::PreSimple, 1).is_err());
        let spec = NuisanceSpec::raw_columns(vec![0]).with_clip(0.5);
        assert!(spec.validate(MissingnessRegime::PreSimple, 1).is_err());
        let spec = NuisanceSpec::raw_columns(vec![0]);
        assert!(spec.validate(MissingnessRegime::PreSimple, 1).is_ok());
    }

    #[test]
    fn gamma_outcome_input_is_regime_bound() {
        let mut spec = NuisanceSpec::raw_columns(vec![0]);
        spec.gamma_map = spec.gamma_map.clone().with_outcome(OutcomeFeature::PostOutcome);
        assert!(spec.validate(MissingnessRegime::PreHard, 1).is_ok());
        assert!(spec.validate(MissingnessRegime::PreSimple, 1).is_err());
        assert!(spec.validate(MissingnessRegime::PostHard, 1).is_err());
    }
}
