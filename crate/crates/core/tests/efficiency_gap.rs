//! The plug-in efficiency-loss decomposition against its Monte Carlo
//! counterpart: the variance an estimator pays for missingness equals the
//! difference between the influence-function variances with and without
//! missing outcomes, computed on the same draws.

mod common;

use didmar_core::data::MissingnessRegime;
use didmar_core::estimators::{efficiency_gap, eif_complete, eif_pre_simple};
use didmar_core::nuisance::NuisanceSpec;
use didmar_core::simulation::{generate, DgpConfig, TrueNuisances, Y1Centering, Z_COLUMNS};

#[test]
fn pre_simple_gap_matches_monte_carlo_variance_difference() {
    let regime = MissingnessRegime::PreSimple;
    let n = 100_000;
    let (data, oracle) = generate(&DgpConfig::new(n, regime, 602), 0).unwrap();
    let completed = oracle.completed_dataset(&data).unwrap();
    let truth = TrueNuisances::new(regime, 5.0, Y1Centering::Centered);

    let p_hat = data.samples().iter().map(|s| s.a_f64()).sum::<f64>() / n as f64;
    let theta = 5.0;

    let var = |values: &[f64]| {
        let m = values.iter().sum::<f64>() / values.len() as f64;
        values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() as f64 - 1.0)
    };

    let phi_missing: Vec<f64> = data
        .samples()
        .iter()
        .map(|s| eif_pre_simple(s, &truth, theta, p_hat).unwrap())
        .collect();
    let phi_complete: Vec<f64> = completed
        .samples()
        .iter()
        .map(|s| eif_complete(s, &truth, theta, p_hat).unwrap())
        .collect();

    let mc_difference = var(&phi_missing) - var(&phi_complete);
    // The orthogonal form of the same quantity: the complete-data influence
    // function is a projection, so the variance difference equals the
    // variance of the difference. Far less Monte Carlo noise.
    let diffs: Vec<f64> = phi_missing.iter().zip(&phi_complete).map(|(m, c)| m - c).collect();
    let var_of_difference = var(&diffs);

    let spec = NuisanceSpec::raw_columns(Z_COLUMNS.to_vec());
    let gap = efficiency_gap(&data, &truth, &spec, regime).unwrap();
    assert_eq!(gap.terms.len(), 2);
    assert!(gap.terms.iter().all(|&t| t >= 0.0));

    let rel_diff = (gap.total() - mc_difference).abs() / mc_difference;
    let rel_orth = (gap.total() - var_of_difference).abs() / var_of_difference;
    println!(
        "plug-in gap {:.4}; MC variance difference {:.4} (rel {:.4}); var of difference {:.4} (rel {:.4})",
        gap.total(),
        mc_difference,
        rel_diff,
        var_of_difference,
        rel_orth
    );
    assert!(mc_difference > 0.0);
    assert!(rel_diff < 0.05, "relative error vs variance difference {rel_diff}");
    assert!(rel_orth < 0.05, "relative error vs variance of difference {rel_orth}");
}

/// Degenerate missingness: with the observation probability pinned to one,
/// both displayed terms vanish.
#[test]
fn gap_vanishes_without_missingness() {
    use didmar_core::data::ObservedSample;
    use didmar_core::error::Result;
    use didmar_core::nuisance::{Arm, Nuisances};

    struct UnitGamma(TrueNuisances);

    impl Nuisances for UnitGamma {
        fn mu0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
            self.0.mu0(s, arm)
        }
        fn mu1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
            self.0.mu1(s, arm)
        }
        fn pi(&self, s: &ObservedSample) -> Result<f64> {
            self.0.pi(s)
        }
        fn gamma_r0(&self, _: &ObservedSample, _: Arm) -> Result<f64> {
            Ok(1.0)
        }
        fn gamma_r1(&self, _: &ObservedSample, _: Arm) -> Result<f64> {
            Ok(1.0)
        }
        fn eta(&self, s: &ObservedSample) -> Result<f64> {
            self.0.eta(s)
        }
    }

    let regime = MissingnessRegime::PreSimple;
    let (data, _) = generate(&DgpConfig::new(2_000, regime, 602), 0).unwrap();
    let truth = UnitGamma(TrueNuisances::new(regime, 5.0, Y1Centering::Centered));
    let spec = NuisanceSpec::raw_columns(Z_COLUMNS.to_vec());
    let gap = efficiency_gap(&data, &truth, &spec, regime).unwrap();
    assert!(gap.total().abs() < 1e-12, "gap {}", gap.total());
}

/// Outcome-dependent variant returns three non-negative terms, and the
/// third vanishes when the nested regression coincides with the plain
/// projection of the outcome regression.
#[test]
fn pre_hard_gap_shape_and_collapse() {
    use common::{mild_prehard_dataset, MildPreHardTruth};
    use didmar_core::data::{FeatureMap, ObservedSample};
    use didmar_core::error::Result;
    use didmar_core::nuisance::{fit_nested_plain, Arm, Nuisances};

    let data = mild_prehard_dataset(20_000, 5.0, 603);
    let truth = MildPreHardTruth::new(5.0);

    // Three terms, all non-negative, on the exact nuisances.
    let mut spec = NuisanceSpec::raw_columns(Z_COLUMNS.to_vec());
    spec.eta_map = FeatureMap::raw(Z_COLUMNS.to_vec());
    let gap = efficiency_gap(&data, &truth, &spec, MissingnessRegime::PreHard).unwrap();
    assert_eq!(gap.terms.len(), 3);
    assert!(gap.terms.iter().all(|&t| t >= 0.0));

    // Replace the nested regression with the plain projection of the
    // supplied outcome regression: the third term collapses to zero.
    struct PlainEta<N> {
        inner: N,
        model: didmar_core::numerics::LinearModel,
        map: FeatureMap,
    }

    impl<N: Nuisances> Nuisances for PlainEta<N> {
        fn mu0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
            self.inner.mu0(s, arm)
        }
        fn mu1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
            self.inner.mu1(s, arm)
        }
        fn pi(&self, s: &ObservedSample) -> Result<f64> {
            self.inner.pi(s)
        }
        fn gamma_r0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
            self.inner.gamma_r0(s, arm)
        }
        fn gamma_r1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
            self.inner.gamma_r1(s, arm)
        }
        fn eta(&self, s: &ObservedSample) -> Result<f64> {
            self.model.predict_row(&self.map.apply(s, None)?)
        }
    }

    let idx: Vec<usize> = (0..data.len()).collect();
    let plain =
        fit_nested_plain(&data, &idx, |s| truth.mu0(s, Arm::Control), &spec.eta_map).unwrap();
    let collapsed = PlainEta { inner: truth, model: plain, map: spec.eta_map.clone() };
    let gap = efficiency_gap(&data, &collapsed, &spec, MissingnessRegime::PreHard).unwrap();
    assert!(gap.terms[2].abs() < 1e-18, "third term {}", gap.terms[2]);
}
