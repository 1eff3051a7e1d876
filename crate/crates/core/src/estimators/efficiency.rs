//! Efficiency-loss diagnostic: how much influence-function variance the
//! missingness costs relative to fully observed data.
//!
//! The loss decomposes into non-negative pieces (the missing-data influence
//! function is the complete-data one plus orthogonal correction terms):
//! inverse-probability-weighted conditional outcome variances for each arm,
//! plus — under outcome-dependent missingness — a term from the gap between
//! the nested regression and its plain projection. Conditional variances are
//! plugged in via squared-residual regressions, floored at zero so each term
//! stays non-negative by construction.

use crate::data::{Dataset, MissingnessRegime, OutcomeFeature};
use crate::error::{Error, Result};
use crate::nuisance::{fit_nested_plain, Arm, Nuisances, NuisanceSpec};
use crate::numerics::{solve_least_squares, DesignMatrix};

/// The per-term decomposition of the efficiency loss.
#[derive(Debug, Clone)]
pub struct EfficiencyGap {
    /// Two terms under covariate-driven missingness, three under
    /// outcome-dependent missingness.
    pub terms: Vec<f64>,
}

impl EfficiencyGap {
    pub fn total(&self) -> f64 {
        self.terms.iter().sum()
    }
}

/// Plug-in efficiency gap for the pre-treatment missingness regimes.
pub fn efficiency_gap<N: Nuisances>(
    data: &Dataset,
    nuis: &N,
    spec: &NuisanceSpec,
    regime: MissingnessRegime,
) -> Result<EfficiencyGap> {
    if !matches!(regime, MissingnessRegime::PreSimple | MissingnessRegime::PreHard) {
        return Err(Error::InvalidConfig(format!(
            "efficiency gap is defined for the pre-treatment missingness regimes, got {regime}"
        )));
    }
    let n = data.len();
    let p_hat = data.samples().iter().map(|s| s.a_f64()).sum::<f64>() / n as f64;

    // Conditional-variance plug-in: regress squared mu-residuals on the
    // mu features among observed units of the arm, floor predictions at 0.
    let var_map = match regime {
        MissingnessRegime::PreHard => spec.mu_map.clone().with_outcome(OutcomeFeature::PostOutcome),
        _ => spec.mu_map.clone(),
    };
    let mut var_fits = Vec::new();
    for arm in [Arm::Treated, Arm::Control] {
        let idx: Vec<usize> = (0..n)
            .filter(|&i| {
                let s = data.sample(i);
                arm.matches(s.a) && s.r0
            })
            .collect();
        if idx.is_empty() {
            return Err(Error::EmptyCell(format!(
                "conditional-variance cell {{A={}, R0=1}}",
                arm.matches(true) as u8
            )));
        }
        let names = var_map.column_labels();
        let width = names.len();
        let mut flat = Vec::with_capacity(idx.len() * width);
        let mut resp = Vec::with_capacity(idx.len());
        for &i in &idx {
            let s = data.sample(i);
            flat.extend(var_map.apply(s, None)?);
            let resid = s.y0.unwrap() - nuis.mu0(s, arm)?;
            resp.push(resid * resid);
        }
        let design = DesignMatrix::new(idx.len(), width, flat, names)?;
        let model = solve_least_squares(&design, &resp, None)
            .map_err(|e| e.in_context("conditional-variance regression"))?;
        var_fits.push(model);
    }

    let var_at = |i: usize, arm: Arm| -> Result<f64> {
        let model = &var_fits[match arm {
            Arm::Treated => 0,
            Arm::Control => 1,
        }];
        let features = var_map.apply(data.sample(i), None)?;
        Ok(model.predict_row(&features)?.max(0.0))
    };

    let mut term1 = 0.0;
    let mut term2 = 0.0;
    for i in 0..n {
        let s = data.sample(i);
        let pi = nuis.pi(s)?;
        let g_t = nuis.gamma_r0(s, Arm::Treated)?;
        let g_c = nuis.gamma_r0(s, Arm::Control)?;
        term1 += pi * var_at(i, Arm::Treated)? * (1.0 - g_t) / g_t;
        term2 += pi * pi / (1.0 - pi) * var_at(i, Arm::Control)? * (1.0 - g_c) / g_c;
    }
    term1 /= n as f64 * p_hat * p_hat;
    term2 /= n as f64 * p_hat * p_hat;

    let mut terms = vec![term1, term2];

    if regime == MissingnessRegime::PreHard {
        // Third term: variance of the arm-weight contrast times the gap
        // between the supplied nested regression and the plain projection of
        // the same outcome regression.
        let all: Vec<usize> = (0..n).collect();
        let plain = fit_nested_plain(data, &all, |s| nuis.mu0(s, Arm::Control), &spec.eta_map)?;
        let mut vals = Vec::with_capacity(n);
        for i in 0..n {
            let s = data.sample(i);
            let pi = nuis.pi(s)?;
            let weight = if s.a {
                1.0 / p_hat
            } else {
                -pi / (1.0 - pi) / p_hat
            };
            let gap = nuis.eta(s)? - plain.predict_row(&spec.eta_map.apply(s, None)?)?;
            vals.push(weight * gap);
        }
        let (_, var) = crate::estimators::stats::mean_and_pop_variance(&vals);
        terms.push(var);
    }

    Ok(EfficiencyGap { terms })
}
