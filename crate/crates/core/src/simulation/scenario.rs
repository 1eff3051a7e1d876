//! Scenario grid: which nuisances are correctly specified.
//!
//! A nuisance is "correct" when its feature map reads the latent covariate
//! columns and "misspecified" when it reads the observed nonlinear ones.
//! Patterns are compact strings over `c`/`x` in the regime's canonical flag
//! order: `(mu, pi, gamma)` for the simple regimes, `(mu, gamma, pi, eta)`
//! for the outcome-dependent ones.

use serde::{Deserialize, Serialize};

use crate::data::{FeatureMap, MissingnessRegime};
use crate::error::{Error, Result};
use crate::nuisance::{EtaMode, NuisanceSpec};
use crate::simulation::dgp::{X_COLUMNS, Z_COLUMNS};

/// One cell of the misspecification grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub regime: MissingnessRegime,
    pub mu_correct: bool,
    pub pi_correct: bool,
    pub gamma_correct: bool,
    /// Present exactly for the outcome-dependent regimes.
    pub eta_correct: Option<bool>,
}

impl ScenarioSpec {
    pub fn new(
        regime: MissingnessRegime,
        mu_correct: bool,
        pi_correct: bool,
        gamma_correct: bool,
        eta_correct: Option<bool>,
    ) -> Result<Self> {
        let spec = Self { regime, mu_correct, pi_correct, gamma_correct, eta_correct };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta_correct.is_some() != self.regime.is_hard() {
            return Err(Error::InvalidConfig(format!(
                "eta flag must be present exactly for outcome-dependent regimes (regime {})",
                self.regime
            )));
        }
        Ok(())
    }

    /// Flag columns in table order.
    pub fn flag_names(regime: MissingnessRegime) -> &'static [&'static str] {
        if regime.is_hard() {
            &["mu", "gamma", "pi", "eta"]
        } else {
            &["mu", "pi", "gamma"]
        }
    }

    /// Flags in table order.
    pub fn flags(&self) -> Vec<bool> {
        match self.eta_correct {
            Some(eta) => vec![self.mu_correct, self.gamma_correct, self.pi_correct, eta],
            None => vec![self.mu_correct, self.pi_correct, self.gamma_correct],
        }
    }

    /// Compact pattern, e.g. `cxc` or `cxcx`.
    pub fn pattern(&self) -> String {
        self.flags().iter().map(|&f| if f { 'c' } else { 'x' }).collect()
    }

    /// Parse a pattern in the regime's flag order.
    pub fn parse_pattern(regime: MissingnessRegime, pattern: &str) -> Result<Self> {
        let want = if regime.is_hard() { 4 } else { 3 };
        let flags: Vec<bool> = pattern
            .chars()
            .map(|c| match c {
                'c' | 'C' => Ok(true),
                'x' | 'X' => Ok(false),
                other => Err(Error::InvalidConfig(format!(
                    "scenario pattern must use 'c'/'x', got '{other}'"
                ))),
            })
            .collect::<Result<_>>()?;
        if flags.len() != want {
            return Err(Error::InvalidConfig(format!(
                "scenario pattern for {regime} needs {want} flags, got {}",
                flags.len()
            )));
        }
        if regime.is_hard() {
            Self::new(regime, flags[0], flags[2], flags[1], Some(flags[3]))
        } else {
            Self::new(regime, flags[0], flags[1], flags[2], None)
        }
    }

    /// The full grid in table row order: for the simple regimes, mu varies
    /// slowest, then gamma, then pi; for the hard regimes, (mu, gamma, pi,
    /// eta) counts down left to right.
    pub fn full_grid(regime: MissingnessRegime) -> Vec<ScenarioSpec> {
        let tf = [true, false];
        let mut grid = Vec::new();
        if regime.is_hard() {
            for &mu in &tf {
                for &gamma in &tf {
                    for &pi in &tf {
                        for &eta in &tf {
                            grid.push(Self::new(regime, mu, pi, gamma, Some(eta)).unwrap());
                        }
                    }
                }
            }
        } else {
            for &mu in &tf {
                for &gamma in &tf {
                    for &pi in &tf {
                        grid.push(Self::new(regime, mu, pi, gamma, None).unwrap());
                    }
                }
            }
        }
        grid
    }

    /// Materialize the nuisance specification this scenario implies on a
    /// simulator-generated dataset.
    pub fn nuisance_spec(&self, clip_xi: f64, eta_mode: EtaMode) -> NuisanceSpec {
        let map_for = |correct: bool| {
            if correct {
                FeatureMap::raw(Z_COLUMNS.to_vec())
            } else {
                FeatureMap::raw(X_COLUMNS.to_vec())
            }
        };
        NuisanceSpec {
            mu_map: map_for(self.mu_correct),
            pi_map: map_for(self.pi_correct),
            gamma_map: map_for(self.gamma_correct),
            eta_map: map_for(self.eta_correct.unwrap_or(true)),
            eta_mode,
            clip_xi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes_match_tables() {
        let simple = ScenarioSpec::full_grid(MissingnessRegime::PreSimple);
        assert_eq!(simple.len(), 8);
        // Table row order: ccc, cxc, ccx, cxx, xcc, xxc, xcx, xxx
        let patterns: Vec<String> = simple.iter().map(|s| s.pattern()).collect();
        assert_eq!(patterns, vec!["ccc", "cxc", "ccx", "cxx", "xcc", "xxc", "xcx", "xxx"]);

        let hard = ScenarioSpec::full_grid(MissingnessRegime::PreHard);
        assert_eq!(hard.len(), 16);
        assert_eq!(hard[0].pattern(), "cccc");
        assert_eq!(hard[1].pattern(), "cccx");
        assert_eq!(hard[15].pattern(), "xxxx");
    }

    #[test]
    fn pattern_roundtrip() {
        for regime in [MissingnessRegime::PreSimple, MissingnessRegime::PreHard] {
            for s in ScenarioSpec::full_grid(regime) {
                let parsed = ScenarioSpec::parse_pattern(regime, &s.pattern()).unwrap();
                assert_eq!(parsed, s);
            }
        }
        assert!(ScenarioSpec::parse_pattern(MissingnessRegime::PreSimple, "cccc").is_err());
        assert!(ScenarioSpec::parse_pattern(MissingnessRegime::PreHard, "ccc").is_err());
        assert!(ScenarioSpec::parse_pattern(MissingnessRegime::PreSimple, "abc").is_err());
    }

    #[test]
    fn eta_flag_bound_to_regime() {
        assert!(ScenarioSpec::new(MissingnessRegime::PreSimple, true, true, true, Some(true)).is_err());
        assert!(ScenarioSpec::new(MissingnessRegime::PreHard, true, true, true, None).is_err());
    }
}
