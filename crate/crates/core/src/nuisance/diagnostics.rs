//! Test-side instrumentation for the nested regression.

use crate::data::{Dataset, FeatureMap, ObservedSample};
use crate::error::Result;
use crate::nuisance::fit::fit_nested_plain;

/// Diagnostics contrasting a nested-regression fit with its oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleDiagnostics {
    /// Mean squared gap between the oracle projection (regressing the true
    /// conditional mean) and the true nested regression.
    pub oracle_risk: f64,
    /// Average plug-in conditional bias
    /// `(mu_hat - mu_star)(gamma_hat - gamma_star) / gamma_hat`, the product
    /// term that the augmented pseudo-outcome is designed to keep small.
    pub product_bias: f64,
}

/// Compute [`OracleDiagnostics`] over control units of `idx`.
#[allow(clippy::too_many_arguments)]
pub fn oracle_diagnostics(
    data: &Dataset,
    idx: &[usize],
    mu_hat: impl Fn(&ObservedSample) -> Result<f64>,
    mu_star: impl Fn(&ObservedSample) -> Result<f64>,
    gamma_hat: impl Fn(&ObservedSample) -> Result<f64>,
    gamma_star: impl Fn(&ObservedSample) -> Result<f64>,
    eta_star: impl Fn(&ObservedSample) -> Result<f64>,
    eta_map: &FeatureMap,
) -> Result<OracleDiagnostics> {
    let oracle_model = fit_nested_plain(data, idx, &mu_star, eta_map)?;

    let controls: Vec<&ObservedSample> =
        idx.iter().map(|&i| data.sample(i)).filter(|s| !s.a).collect();
    let m = controls.len() as f64;

    let mut risk = 0.0;
    let mut bias = 0.0;
    for s in &controls {
        let oracle_pred = oracle_model.predict_row(&eta_map.apply(s, None)?)?;
        let gap = oracle_pred - eta_star(s)?;
        risk += gap * gap;
        let gh = gamma_hat(s)?;
        bias += (mu_hat(s)? - mu_star(s)?) * (gh - gamma_star(s)?) / gh;
    }
    Ok(OracleDiagnostics { oracle_risk: risk / m, product_bias: bias / m })
}
