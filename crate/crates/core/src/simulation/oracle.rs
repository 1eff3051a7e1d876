//! Exact nuisance functions of the synthetic process.
//!
//! Valid only on simulator-generated datasets, whose latent covariates live
//! in columns `z1..z4`. Joint normality of the two outcome periods gives the
//! outcome-dependent regressions in closed form; tests lean on these for
//! oracle-vs-estimate comparisons and controlled perturbation studies.

use crate::data::{MissingnessRegime, ObservedSample};
use crate::error::{Error, Result};
use crate::nuisance::{Arm, Nuisances};
use crate::numerics::sigmoid;
use crate::simulation::dgp::{
    missingness_logit_base, outcome_mean, propensity_logit, Y1Centering, Z_COLUMNS,
};

/// Closed-form nuisances of the data-generating process.
#[derive(Debug, Clone, Copy)]
pub struct TrueNuisances {
    pub regime: MissingnessRegime,
    pub theta_star: f64,
    pub y1_centering: Y1Centering,
    /// Clip probabilities like an estimated set would; `None` evaluates the
    /// raw truth.
    pub clip_xi: Option<f64>,
}

impl TrueNuisances {
    pub fn new(regime: MissingnessRegime, theta_star: f64, y1_centering: Y1Centering) -> Self {
        Self { regime, theta_star, y1_centering, clip_xi: None }
    }

    pub fn with_clip(mut self, clip_xi: f64) -> Self {
        self.clip_xi = Some(clip_xi);
        self
    }

    #[inline]
    fn clip(&self, p: f64) -> f64 {
        match self.clip_xi {
            Some(xi) => p.clamp(xi, 1.0 - xi),
            None => p,
        }
    }

    #[inline]
    fn z(&self, s: &ObservedSample) -> Result<[f64; 4]> {
        if s.x.len() <= *Z_COLUMNS.last().unwrap() {
            return Err(Error::MissingInput(
                "oracle nuisances need the latent covariate columns z1..z4".into(),
            ));
        }
        Ok([s.x[Z_COLUMNS[0]], s.x[Z_COLUMNS[1]], s.x[Z_COLUMNS[2]], s.x[Z_COLUMNS[3]]])
    }
}

impl Nuisances for TrueNuisances {
    fn mu0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        let z = self.z(s)?;
        let m = outcome_mean(&z);
        match self.regime {
            // Given both periods, the baseline outcome splits the difference:
            // E[Y0 | z, y1, a] = (m(z) + y1 - theta * a) / 2 under equal noise
            // variances in the two periods.
            MissingnessRegime::PreHard => {
                let y1 = s.y1.ok_or(Error::MissingInput("oracle mu0 needs observed y1".into()))?;
                let effect = if matches!(arm, Arm::Treated) { self.theta_star } else { 0.0 };
                Ok((m + y1 - effect) / 2.0)
            }
            _ => Ok(m),
        }
    }

    fn mu1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        let effect = if matches!(arm, Arm::Treated) { self.theta_star } else { 0.0 };
        match self.regime {
            // E[Y1 | z, y0, a] = y0 + theta * a: the second period is a pure
            // random walk from the first.
            MissingnessRegime::PostHard => {
                let y0 = s.y0.ok_or(Error::MissingInput("oracle mu1 needs observed y0".into()))?;
                Ok(y0 + effect)
            }
            _ => Ok(outcome_mean(&self.z(s)?) + effect),
        }
    }

    fn pi(&self, s: &ObservedSample) -> Result<f64> {
        Ok(self.clip(sigmoid(propensity_logit(&self.z(s)?))))
    }

    fn gamma_r0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        let z = self.z(s)?;
        let base = missingness_logit_base(&z, matches!(arm, Arm::Treated));
        let logit = match self.regime {
            MissingnessRegime::PreHard => {
                let y1 = s.y1.ok_or(Error::MissingInput("oracle gamma needs observed y1".into()))?;
                base + 0.3 * self.y1_centering.shift(y1)
            }
            _ => base,
        };
        Ok(self.clip(sigmoid(logit)))
    }

    fn gamma_r1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        let z = self.z(s)?;
        let base = missingness_logit_base(&z, matches!(arm, Arm::Treated));
        let logit = match self.regime {
            MissingnessRegime::PostHard => {
                let y0 = s.y0.ok_or(Error::MissingInput("oracle gamma needs observed y0".into()))?;
                base + 0.3 * self.y1_centering.shift(y0)
            }
            _ => base,
        };
        Ok(self.clip(sigmoid(logit)))
    }

    fn eta(&self, s: &ObservedSample) -> Result<f64> {
        // Averaging the outcome-dependent regression over the opposite
        // period's control distribution lands back on the plain outcome mean.
        Ok(outcome_mean(&self.z(s)?))
    }
}
