//! Fitting of outcome regressions, propensity, missingness models, and the
//! nested regression on a training complement.

use crate::data::{Dataset, FeatureMap, MissingnessRegime, ObservedSample, OutcomeFeature};
use crate::error::{Error, Result};
use crate::numerics::{
    fit_logistic, solve_least_squares, DesignMatrix, LinearModel, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::nuisance::set::{Arm, FitFlag, FittedCurve, FittedProb, NuisanceSet};
use crate::nuisance::spec::{EtaMode, NuisanceSpec};

/// Which outcome/indicator pair the nested-regression augmentation corrects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomePeriod {
    Pre,
    Post,
}

fn build_design(data: &Dataset, idx: &[usize], map: &FeatureMap) -> Result<DesignMatrix> {
    let mut rows = Vec::with_capacity(idx.len());
    for &i in idx {
        rows.push(map.apply(data.sample(i), None)?);
    }
    let names = map.column_labels();
    let width = names.len();
    let mut flat = Vec::with_capacity(rows.len() * width);
    for r in rows {
        flat.extend(r);
    }
    DesignMatrix::new(idx.len(), width, flat, names)
}

fn ols_fit(
    data: &Dataset,
    idx: &[usize],
    map: &FeatureMap,
    response: impl Fn(&ObservedSample) -> f64,
    what: &str,
) -> Result<FittedCurve> {
    let design = build_design(data, idx, map).map_err(|e| e.in_context(what.to_string()))?;
    let y: Vec<f64> = idx.iter().map(|&i| response(data.sample(i))).collect();
    let model = solve_least_squares(&design, &y, None).map_err(|e| e.in_context(what.to_string()))?;
    Ok(FittedCurve { model, map: map.clone() })
}

fn logistic_fit(
    data: &Dataset,
    idx: &[usize],
    map: &FeatureMap,
    label: impl Fn(&ObservedSample) -> f64,
    what: &str,
    flags: &mut Vec<FitFlag>,
) -> Result<FittedProb> {
    let design = build_design(data, idx, map).map_err(|e| e.in_context(what.to_string()))?;
    let labels: Vec<f64> = idx.iter().map(|&i| label(data.sample(i))).collect();
    let fit = fit_logistic(&design, &labels, DEFAULT_MAX_ITER, DEFAULT_TOL)
        .map_err(|e| e.in_context(what.to_string()))?;
    flags.push(FitFlag::from_fit(what, &fit));
    Ok(FittedProb { fit, map: map.clone() })
}

fn cell(data: &Dataset, idx: &[usize], pred: impl Fn(&ObservedSample) -> bool, what: &str) -> Result<Vec<usize>> {
    let out: Vec<usize> = idx.iter().copied().filter(|&i| pred(data.sample(i))).collect();
    if out.is_empty() {
        return Err(Error::EmptyCell(what.to_string()));
    }
    Ok(out)
}

/// Regress an already-fitted outcome regression's predictions onto `eta_map`
/// features among control units of the given slice.
pub fn fit_nested_plain(
    data: &Dataset,
    idx: &[usize],
    mu: impl Fn(&ObservedSample) -> Result<f64>,
    eta_map: &FeatureMap,
) -> Result<LinearModel> {
    let controls = cell(data, idx, |s| !s.a, "nested regression control cell {A=0}")?;
    let design = build_design(data, &controls, eta_map)?;
    let y: Vec<f64> = controls
        .iter()
        .map(|&i| mu(data.sample(i)))
        .collect::<Result<_>>()?;
    solve_least_squares(&design, &y, None).map_err(|e| e.in_context("nested regression (plain)"))
}

/// Regress the augmented pseudo-outcome
/// `mu(s) + r * (y - mu(s)) / gamma(s)` onto `eta_map` features among
/// control units, where `(y, r)` is the outcome/indicator pair of `period`.
/// `gamma` must already be clipped away from zero.
pub fn fit_nested_augmented(
    data: &Dataset,
    idx: &[usize],
    mu: impl Fn(&ObservedSample) -> Result<f64>,
    gamma: impl Fn(&ObservedSample) -> Result<f64>,
    eta_map: &FeatureMap,
    period: OutcomePeriod,
) -> Result<LinearModel> {
    let controls = cell(data, idx, |s| !s.a, "nested regression control cell {A=0}")?;
    let design = build_design(data, &controls, eta_map)?;
    let mut y = Vec::with_capacity(controls.len());
    for &i in &controls {
        let s = data.sample(i);
        let m = mu(s)?;
        let (observed, value) = match period {
            OutcomePeriod::Pre => (s.r0, s.y0),
            OutcomePeriod::Post => (s.r1, s.y1),
        };
        let pseudo = if observed {
            let obs = value.ok_or(Error::MissingInput("outcome flagged observed but absent".into()))?;
            m + (obs - m) / gamma(s)?
        } else {
            m
        };
        y.push(pseudo);
    }
    solve_least_squares(&design, &y, None).map_err(|e| e.in_context("nested regression (augmented)"))
}

/// Fit every nuisance the regime's influence function needs.
///
/// `train` carries the indices the outcome, propensity, and missingness
/// models are learned on; `eta_train` is the subsample reserved for the
/// nested regression's own fitting step (hard regimes only — pass it empty
/// otherwise). Probability evaluations from the returned set are clipped
/// into `[xi, 1 - xi]`.
pub fn fit_nuisances(
    data: &Dataset,
    train: &[usize],
    eta_train: &[usize],
    spec: &NuisanceSpec,
) -> Result<NuisanceSet> {
    let regime = data.regime();
    spec.validate(regime, data.p())?;
    if train.is_empty() {
        return Err(Error::EmptyCell("training slice".into()));
    }

    let mut flags = Vec::new();
    let clip = spec.clip_xi;

    // Outcome-dependent regimes feed the observed opposite-period outcome to
    // the outcome regression and the missingness model.
    let mu_hard_map = |base: &FeatureMap| match regime {
        MissingnessRegime::PreHard => base.clone().with_outcome(OutcomeFeature::PostOutcome),
        MissingnessRegime::PostHard => base.clone().with_outcome(OutcomeFeature::PreOutcome),
        _ => base.clone(),
    };
    let mu0_map = match regime {
        MissingnessRegime::PreHard => mu_hard_map(&spec.mu_map),
        _ => spec.mu_map.clone(),
    };
    let mu1_map = match regime {
        MissingnessRegime::PostHard => mu_hard_map(&spec.mu_map),
        _ => spec.mu_map.clone(),
    };
    let gamma_map = mu_hard_map(&spec.gamma_map);

    let pi = logistic_fit(data, train, &spec.pi_map, |s| s.a_f64(), "pi", &mut flags)?;

    let arm_cell = |arm: Arm, extra: &dyn Fn(&ObservedSample) -> bool, what: &str| {
        cell(data, train, |s| arm.matches(s.a) && extra(s), what)
    };

    let mut mu0: [Option<FittedCurve>; 2] = [None, None];
    let mut mu1: [Option<FittedCurve>; 2] = [None, None];
    let mut gamma0: [Option<FittedProb>; 2] = [None, None];
    let mut gamma1: [Option<FittedProb>; 2] = [None, None];
    let mut eta: Option<FittedCurve> = None;

    let fit_mu0 = |arm: Arm| -> Result<FittedCurve> {
        let what = format!("mu0 {} training cell {{A={}, R0=1}}", arm.as_str(), arm.matches(true) as u8);
        let idx = arm_cell(arm, &|s: &ObservedSample| s.r0, &what)?;
        ols_fit(data, &idx, &mu0_map, |s| s.y0.unwrap(), &format!("mu0 {}", arm.as_str()))
    };
    let fit_mu1 = |arm: Arm, need_r1: bool| -> Result<FittedCurve> {
        let what = format!("mu1 {} training cell", arm.as_str());
        let idx = arm_cell(arm, &|s: &ObservedSample| !need_r1 || s.r1, &what)?;
        ols_fit(data, &idx, &mu1_map, |s| s.y1.unwrap(), &format!("mu1 {}", arm.as_str()))
    };

    match regime {
        MissingnessRegime::PreSimple | MissingnessRegime::PreHard => {
            mu0[0] = Some(fit_mu0(Arm::Control)?);
            mu0[1] = Some(fit_mu0(Arm::Treated)?);
            mu1[0] = Some(fit_mu1(Arm::Control, false)?);
            for arm in [Arm::Control, Arm::Treated] {
                let what = format!("gamma_r0 {}", arm.as_str());
                let idx = arm_cell(arm, &|_| true, &what)?;
                let fitted = logistic_fit(
                    data,
                    &idx,
                    &gamma_map,
                    |s| if s.r0 { 1.0 } else { 0.0 },
                    &what,
                    &mut flags,
                )?;
                gamma0[arm_index(arm)] = Some(fitted);
            }
        }
        MissingnessRegime::PostSimple | MissingnessRegime::PostHard => {
            mu1[0] = Some(fit_mu1(Arm::Control, true)?);
            mu1[1] = Some(fit_mu1(Arm::Treated, true)?);
            mu0[0] = Some({
                let idx = arm_cell(Arm::Control, &|_| true, "mu0 control training cell {A=0}")?;
                ols_fit(data, &idx, &spec.mu_map, |s| s.y0.unwrap(), "mu0 control")?
            });
            for arm in [Arm::Control, Arm::Treated] {
                let what = format!("gamma_r1 {}", arm.as_str());
                let idx = arm_cell(arm, &|_| true, &what)?;
                let fitted = logistic_fit(
                    data,
                    &idx,
                    &gamma_map,
                    |s| if s.r1 { 1.0 } else { 0.0 },
                    &what,
                    &mut flags,
                )?;
                gamma1[arm_index(arm)] = Some(fitted);
            }
        }
        MissingnessRegime::BothSimple => {
            mu0[0] = Some(fit_mu0(Arm::Control)?);
            mu0[1] = Some(fit_mu0(Arm::Treated)?);
            mu1[0] = Some(fit_mu1(Arm::Control, true)?);
            mu1[1] = Some(fit_mu1(Arm::Treated, true)?);
            for arm in [Arm::Control, Arm::Treated] {
                let idx = arm_cell(arm, &|_| true, "gamma training cell")?;
                let g0 = logistic_fit(
                    data,
                    &idx,
                    &spec.gamma_map,
                    |s| if s.r0 { 1.0 } else { 0.0 },
                    &format!("gamma_r0 {}", arm.as_str()),
                    &mut flags,
                )?;
                let g1 = logistic_fit(
                    data,
                    &idx,
                    &spec.gamma_map,
                    |s| if s.r1 { 1.0 } else { 0.0 },
                    &format!("gamma_r1 {}", arm.as_str()),
                    &mut flags,
                )?;
                gamma0[arm_index(arm)] = Some(g0);
                gamma1[arm_index(arm)] = Some(g1);
            }
        }
    }

    if regime.is_hard() {
        if eta_train.is_empty() {
            return Err(Error::EmptyCell(
                "nested regression training slice (eta half)".into(),
            ));
        }
        let model = match regime {
            MissingnessRegime::PreHard => {
                let mu0_c = mu0[0].as_ref().unwrap();
                match spec.eta_mode {
                    EtaMode::Plain => {
                        fit_nested_plain(data, eta_train, |s| mu0_c.evaluate(s), &spec.eta_map)?
                    }
                    EtaMode::Augmented => {
                        let g0_c = gamma0[0].as_ref().unwrap();
                        fit_nested_augmented(
                            data,
                            eta_train,
                            |s| mu0_c.evaluate(s),
                            |s| Ok(g0_c.evaluate_raw(s)?.clamp(clip, 1.0 - clip)),
                            &spec.eta_map,
                            OutcomePeriod::Pre,
                        )?
                    }
                }
            }
            MissingnessRegime::PostHard => {
                let mu1_c = mu1[0].as_ref().unwrap();
                match spec.eta_mode {
                    EtaMode::Plain => {
                        fit_nested_plain(data, eta_train, |s| mu1_c.evaluate(s), &spec.eta_map)?
                    }
                    EtaMode::Augmented => {
                        let g1_c = gamma1[0].as_ref().unwrap();
                        fit_nested_augmented(
                            data,
                            eta_train,
                            |s| mu1_c.evaluate(s),
                            |s| Ok(g1_c.evaluate_raw(s)?.clamp(clip, 1.0 - clip)),
                            &spec.eta_map,
                            OutcomePeriod::Post,
                        )?
                    }
                }
            }
            _ => unreachable!(),
        };
        eta = Some(FittedCurve { model, map: spec.eta_map.clone() });
    }

    Ok(NuisanceSet {
        regime,
        clip_xi: clip,
        mu0,
        mu1,
        pi,
        gamma0,
        gamma1,
        eta,
        flags,
    })
}

#[inline]
fn arm_index(arm: Arm) -> usize {
    match arm {
        Arm::Control => 0,
        Arm::Treated => 1,
    }
}
