//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)]

use didmar_core::data::{Dataset, MissingnessRegime, ObservedSample};
use didmar_core::error::Result;
use didmar_core::estimators::eif_value;
use didmar_core::nuisance::{Arm, Nuisances};
use didmar_core::numerics::{logit, sigmoid};

/// Population-style single-replication estimate: one estimating-equation
/// solve with injected nuisances and no sample splitting. Returns the point
/// estimate and its plug-in standard error.
pub fn single_shot(data: &Dataset, nuis: &impl Nuisances, regime: MissingnessRegime) -> (f64, f64) {
    let n = data.len();
    let p_hat = data.samples().iter().map(|s| s.a_f64()).sum::<f64>() / n as f64;
    let phi0: Vec<f64> = data
        .samples()
        .iter()
        .map(|s| eif_value(regime, s, nuis, 0.0, p_hat).expect("influence evaluation"))
        .collect();
    let theta = phi0.iter().sum::<f64>() / n as f64;
    let ifs: Vec<f64> = data
        .samples()
        .iter()
        .zip(&phi0)
        .map(|(s, v)| v - s.a_f64() / p_hat * theta)
        .collect();
    let mean = ifs.iter().sum::<f64>() / n as f64;
    let var = ifs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (theta, (var / n as f64).sqrt())
}

/// Additive/logit-scale perturbations layered over a base nuisance set.
/// Shift arrays index `[control, treated]`.
pub struct Perturbed<N> {
    pub base: N,
    pub mu0_shift: [f64; 2],
    pub mu1_shift: [f64; 2],
    pub pi_logit_shift: f64,
    pub gamma0_logit_shift: [f64; 2],
    pub gamma1_logit_shift: [f64; 2],
    pub eta_shift: f64,
}

impl<N> Perturbed<N> {
    pub fn new(base: N) -> Self {
        Self {
            base,
            mu0_shift: [0.0; 2],
            mu1_shift: [0.0; 2],
            pi_logit_shift: 0.0,
            gamma0_logit_shift: [0.0; 2],
            gamma1_logit_shift: [0.0; 2],
            eta_shift: 0.0,
        }
    }
}

fn arm_idx(arm: Arm) -> usize {
    match arm {
        Arm::Control => 0,
        Arm::Treated => 1,
    }
}

fn shift_prob(p: f64, shift: f64) -> f64 {
    if shift == 0.0 {
        p
    } else {
        sigmoid(logit(p.clamp(1e-12, 1.0 - 1e-12)) + shift)
    }
}

impl<N: Nuisances> Nuisances for Perturbed<N> {
    fn mu0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        Ok(self.base.mu0(s, arm)? + self.mu0_shift[arm_idx(arm)])
    }

    fn mu1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        Ok(self.base.mu1(s, arm)? + self.mu1_shift[arm_idx(arm)])
    }

    fn pi(&self, s: &ObservedSample) -> Result<f64> {
        Ok(shift_prob(self.base.pi(s)?, self.pi_logit_shift))
    }

    fn gamma_r0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        Ok(shift_prob(self.base.gamma_r0(s, arm)?, self.gamma0_logit_shift[arm_idx(arm)]))
    }

    fn gamma_r1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        Ok(shift_prob(self.base.gamma_r1(s, arm)?, self.gamma1_logit_shift[arm_idx(arm)]))
    }

    fn eta(&self, s: &ObservedSample) -> Result<f64> {
        Ok(self.base.eta(s)? + self.eta_shift)
    }
}

/// Nuisance set assembled slot by slot from closures; the robustness grid
/// mixes exact and misspecified components freely with it.
type Slot = Box<dyn Fn(&ObservedSample) -> Result<f64> + Sync>;

pub struct SlotNuisances {
    pub mu0: [Slot; 2],
    pub mu1: [Slot; 2],
    pub pi: Slot,
    pub gamma0: [Slot; 2],
    pub gamma1: [Slot; 2],
    pub eta: Slot,
}

impl Nuisances for SlotNuisances {
    fn mu0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        (self.mu0[arm_idx(arm)])(s)
    }

    fn mu1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        (self.mu1[arm_idx(arm)])(s)
    }

    fn pi(&self, s: &ObservedSample) -> Result<f64> {
        (self.pi)(s)
    }

    fn gamma_r0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        (self.gamma0[arm_idx(arm)])(s)
    }

    fn gamma_r1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        (self.gamma1[arm_idx(arm)])(s)
    }

    fn eta(&self, s: &ObservedSample) -> Result<f64> {
        (self.eta)(s)
    }
}

/// Ordinary least squares slope fit for log-log rate checks.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Force both missingness models to exactly one (degenerate-missingness
/// reductions).
pub struct UnitGamma<N>(pub N);

impl<N: Nuisances> Nuisances for UnitGamma<N> {
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

/// Present covariate-only nuisances through the outcome-dependent interface:
/// the nested-regression slot forwards to the control outcome regression of
/// the collapsing period.
pub struct CollapsedEta<N> {
    pub inner: N,
    pub post: bool,
}

impl<N: Nuisances> Nuisances for CollapsedEta<N> {
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
        if self.post {
            self.inner.mu1(s, Arm::Control)
        } else {
            self.inner.mu0(s, Arm::Control)
        }
    }
}

/// Outcome coefficient of the mild outcome-dependent mechanism below.
pub const MILD_OUTCOME_COEF: f64 = 0.05;

fn mild_outcome_mean(z: &[f64]) -> f64 {
    210.0 + 27.4 * z[0] + 13.7 * z[1] + 13.7 * z[2] + 13.7 * z[3]
}

fn mild_observation_logit(z: &[f64], a: bool, y1: f64) -> f64 {
    -0.25 * z[0] - 0.1 * z[1] - 0.5 * z[2] + 0.3 * z[3] - if a { 0.2 } else { 0.0 }
        + MILD_OUTCOME_COEF * (y1 - 210.0)
}

/// Outcome-dependent pre-treatment missingness with genuine overlap: the
/// outcome coefficient is small enough that exact inverse-probability
/// weights have finite variance. Columns follow the simulator layout
/// (`x1..x4` nonlinear, `z1..z4` latent).
pub fn mild_prehard_dataset(n: usize, theta: f64, seed: u64) -> Dataset {
    use didmar_core::data::z_to_x_transform;
    use didmar_core::numerics::RandomSource;

    let src = RandomSource::new(seed);
    let zs = src.stream(0).normals(4 * n);
    let es = src.stream(1).normals(2 * n);
    let us = src.stream(2).uniforms(2 * n);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let z: [f64; 4] = [zs[4 * i], zs[4 * i + 1], zs[4 * i + 2], zs[4 * i + 3]];
        let a = us[2 * i] < sigmoid(-z[0] + 0.5 * z[1] - 0.25 * z[2] - 0.1 * z[3]);
        let y0 = mild_outcome_mean(&z) + es[2 * i];
        let y1 = y0 + es[2 * i + 1] + if a { theta } else { 0.0 };
        let r0 = us[2 * i + 1] < sigmoid(mild_observation_logit(&z, a, y1));
        let mut x = z_to_x_transform(&z).to_vec();
        x.extend_from_slice(&z);
        samples
            .push(ObservedSample::new(x, a, r0, r0.then_some(y0), true, Some(y1)).unwrap());
    }
    Dataset::new(
        samples,
        MissingnessRegime::PreHard,
        vec![
            "x1".into(),
            "x2".into(),
            "x3".into(),
            "x4".into(),
            "z1".into(),
            "z2".into(),
            "z3".into(),
            "z4".into(),
        ],
    )
    .unwrap()
}

/// Exact nuisances of [`mild_prehard_dataset`].
#[derive(Debug, Clone, Copy)]
pub struct MildPreHardTruth {
    pub theta: f64,
    /// Clip the propensity like the estimator would; the missingness
    /// probability stays raw (it is bounded away from zero by design).
    pub clip_pi: Option<f64>,
}

impl MildPreHardTruth {
    pub fn new(theta: f64) -> Self {
        Self { theta, clip_pi: None }
    }

    fn z<'a>(&self, s: &'a ObservedSample) -> &'a [f64] {
        &s.x[4..8]
    }
}

impl Nuisances for MildPreHardTruth {
    fn mu0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        let effect = if matches!(arm, Arm::Treated) { self.theta } else { 0.0 };
        Ok((mild_outcome_mean(self.z(s)) + s.y1.unwrap() - effect) / 2.0)
    }

    fn mu1(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        let effect = if matches!(arm, Arm::Treated) { self.theta } else { 0.0 };
        Ok(mild_outcome_mean(self.z(s)) + effect)
    }

    fn pi(&self, s: &ObservedSample) -> Result<f64> {
        let z = self.z(s);
        let p = sigmoid(-z[0] + 0.5 * z[1] - 0.25 * z[2] - 0.1 * z[3]);
        Ok(match self.clip_pi {
            Some(xi) => p.clamp(xi, 1.0 - xi),
            None => p,
        })
    }

    fn gamma_r0(&self, s: &ObservedSample, arm: Arm) -> Result<f64> {
        Ok(sigmoid(mild_observation_logit(
            self.z(s),
            matches!(arm, Arm::Treated),
            s.y1.unwrap(),
        )))
    }

    fn gamma_r1(&self, _: &ObservedSample, _: Arm) -> Result<f64> {
        Ok(1.0)
    }

    fn eta(&self, s: &ObservedSample) -> Result<f64> {
        Ok(mild_outcome_mean(self.z(s)))
    }
}
