//! Large-sample properties of the nested regression: the augmented
//! pseudo-outcome's debiasing, its product-form bias structure, and the
//! oracle diagnostics.
//!
//! These tests run on a bespoke generator with genuine overlap in the
//! missingness mechanism (a mild outcome coefficient), so that exact
//! inverse-probability weights have finite variance and Monte Carlo error
//! bands are meaningful.

mod common;

use common::fitted_slope;
use didmar_core::data::{Dataset, FeatureMap, MissingnessRegime, ObservedSample};
use didmar_core::nuisance::{
    fit_nested_augmented, fit_nested_plain, oracle_diagnostics, OutcomePeriod,
};
use didmar_core::numerics::{sigmoid, RandomSource};

const OUTCOME_COEF: f64 = 0.05;

fn outcome_mean(z: &[f64]) -> f64 {
    210.0 + 27.4 * z[0] + 13.7 * z[1] + 13.7 * z[2] + 13.7 * z[3]
}

fn observation_logit(z: &[f64], a: bool, y1: f64) -> f64 {
    -0.25 * z[0] - 0.1 * z[1] - 0.5 * z[2] + 0.3 * z[3] - if a { 0.2 } else { 0.0 }
        + OUTCOME_COEF * (y1 - 210.0)
}

/// Pre-treatment-missing data with a mild outcome-dependent mechanism.
fn mild_overlap_dataset(n: usize, seed: u64) -> Dataset {
    let src = RandomSource::new(seed);
    let zs = src.stream(0).normals(4 * n);
    let es = src.stream(1).normals(2 * n);
    let us = src.stream(2).uniforms(2 * n);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let z = &zs[4 * i..4 * i + 4];
        let a = us[2 * i] < sigmoid(-z[0] + 0.5 * z[1] - 0.25 * z[2] - 0.1 * z[3]);
        let y0 = outcome_mean(z) + es[2 * i];
        let y1 = y0 + es[2 * i + 1] + if a { 5.0 } else { 0.0 };
        let r0 = us[2 * i + 1] < sigmoid(observation_logit(z, a, y1));
        samples.push(
            ObservedSample::new(z.to_vec(), a, r0, r0.then_some(y0), true, Some(y1)).unwrap(),
        );
    }
    Dataset::new(
        samples,
        MissingnessRegime::PreHard,
        vec!["z1".into(), "z2".into(), "z3".into(), "z4".into()],
    )
    .unwrap()
}

/// True conditional mean of y0 given (z, y1) on the control arm.
fn mu_star(s: &ObservedSample) -> f64 {
    (outcome_mean(&s.x) + s.y1.unwrap()) / 2.0
}

fn gamma_star(s: &ObservedSample) -> f64 {
    sigmoid(observation_logit(&s.x, s.a, s.y1.unwrap()))
}

fn eta_star(s: &ObservedSample) -> f64 {
    outcome_mean(&s.x)
}

fn eta_map() -> FeatureMap {
    FeatureMap::raw(vec![0, 1, 2, 3])
}

/// Mean and standard error of the pseudo-outcome residuals against the true
/// nested regression over control units; the OLS intercept makes the mean
/// prediction bias equal the mean response residual.
fn pseudo_residual_mean_se(
    data: &Dataset,
    mu: impl Fn(&ObservedSample) -> f64,
    gamma: impl Fn(&ObservedSample) -> f64,
) -> (f64, f64) {
    let mut residuals = Vec::new();
    for s in data.samples().iter().filter(|s| !s.a) {
        let m = mu(s);
        let pseudo = if s.r0 { m + (s.y0.unwrap() - m) / gamma(s) } else { m };
        residuals.push(pseudo - eta_star(s));
    }
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Exact inputs: the augmented fit recovers the true nested regression
/// coefficients.
#[test]
fn augmented_with_exact_inputs_recovers_truth() {
    let data = mild_overlap_dataset(100_000, 301);
    let idx: Vec<usize> = (0..data.len()).collect();
    let model = fit_nested_augmented(
        &data,
        &idx,
        |s| Ok(mu_star(s)),
        |s| Ok(gamma_star(s)),
        &eta_map(),
        OutcomePeriod::Pre,
    )
    .unwrap();
    let expect = [210.0, 27.4, 13.7, 13.7, 13.7];
    for (k, want) in expect.iter().enumerate() {
        let got = model.coefficients[k];
        assert!((got - want).abs() < 0.1, "coef {k}: {got} vs {want}");
    }
}

/// A fixed offset on the outcome regression leaves the augmented fit
/// unbiased when the missingness model is exact (its bias is the product of
/// the two errors), while the plain fit absorbs the offset one for one.
#[test]
fn augmented_debiases_offset_outcome_regression() {
    let delta = 3.0;
    let data = mild_overlap_dataset(100_000, 302);
    let idx: Vec<usize> = (0..data.len()).collect();

    let (aug_bias, aug_se) =
        pseudo_residual_mean_se(&data, |s| mu_star(s) + delta, gamma_star);
    assert!(
        aug_bias.abs() <= 3.0 * aug_se,
        "augmented bias {aug_bias} vs 3*MC error {:.5}",
        3.0 * aug_se
    );

    // Plain regression of the offset outcome regression: bias = delta.
    let plain = fit_nested_plain(&data, &idx, |s| Ok(mu_star(s) + delta), &eta_map()).unwrap();
    let mut bias = 0.0;
    let mut count = 0.0;
    for s in data.samples().iter().filter(|s| !s.a) {
        bias += plain.predict_row(&eta_map().apply(s, None).unwrap()).unwrap() - eta_star(s);
        count += 1.0;
    }
    bias /= count;
    assert!((bias - delta).abs() < 0.1, "plain bias {bias} vs offset {delta}");

    // The fitted augmented model agrees with the residual-level check.
    let model = fit_nested_augmented(
        &data,
        &idx,
        |s| Ok(mu_star(s) + delta),
        |s| Ok(gamma_star(s)),
        &eta_map(),
        OutcomePeriod::Pre,
    )
    .unwrap();
    let mut fit_bias = 0.0;
    for s in data.samples().iter().filter(|s| !s.a) {
        fit_bias += model.predict_row(&eta_map().apply(s, None).unwrap()).unwrap() - eta_star(s);
    }
    fit_bias /= count;
    assert!(
        fit_bias.abs() <= 3.0 * aug_se,
        "augmented fit bias {fit_bias} vs band {:.5}",
        3.0 * aug_se
    );
}

/// Perturbing the outcome regression and the missingness model together by
/// epsilon leaves a pseudo-outcome bias that vanishes like epsilon^2: the
/// product structure of the augmentation.
#[test]
fn joint_perturbation_bias_is_second_order() {
    let data = mild_overlap_dataset(100_000, 303);
    let scales: [f64; 3] = [0.4, 0.2, 0.1];

    let bias_at = |eps: f64| -> f64 {
        let (mean, _) = pseudo_residual_mean_se(
            &data,
            |s| mu_star(s) + eps * 30.0,
            |s| sigmoid(observation_logit(&s.x, s.a, s.y1.unwrap()) + eps * 2.0),
        );
        mean
    };
    let baseline = bias_at(0.0);
    let logs: Vec<(f64, f64)> = scales
        .iter()
        .map(|&eps| (eps.ln(), (bias_at(eps) - baseline).abs().ln()))
        .collect();
    let xs: Vec<f64> = logs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = logs.iter().map(|p| p.1).collect();
    let slope = fitted_slope(&xs, &ys);
    assert!(slope >= 1.7, "nested bias slope {slope}");
}

/// Product-bias plug-in: zero when the missingness model is exact, and
/// near the analytic product when both pieces are off.
#[test]
fn oracle_diagnostics_product_structure() {
    let data = mild_overlap_dataset(50_000, 304);
    let idx: Vec<usize> = (0..data.len()).collect();

    let diag = oracle_diagnostics(
        &data,
        &idx,
        |s| Ok(mu_star(s) + 2.0),
        |s| Ok(mu_star(s)),
        |s| Ok(gamma_star(s)),
        |s| Ok(gamma_star(s)),
        |s| Ok(eta_star(s)),
        &eta_map(),
    )
    .unwrap();
    assert!(diag.product_bias.abs() < 1e-12, "product bias {}", diag.product_bias);
    assert!(diag.oracle_risk >= 0.0);
    // The oracle projection targets a linear truth; its risk is tiny.
    assert!(diag.oracle_risk < 0.01, "oracle risk {}", diag.oracle_risk);

    let shift = 0.1;
    let diag = oracle_diagnostics(
        &data,
        &idx,
        |s| Ok(mu_star(s) + 2.0),
        |s| Ok(mu_star(s)),
        |s| Ok((gamma_star(s) + shift).min(0.999)),
        |s| Ok(gamma_star(s)),
        |s| Ok(eta_star(s)),
        &eta_map(),
    )
    .unwrap();
    // b = (mu_hat - mu_star)(gamma_hat - gamma_star)/gamma_hat = 2*shift/gamma_hat > 0.
    assert!(diag.product_bias > 0.1, "product bias {}", diag.product_bias);
}
