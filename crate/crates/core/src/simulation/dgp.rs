//! Synthetic data-generating process for the Monte Carlo study.
//!
//! Latent covariates are standard normal; the observed covariates are
//! nonlinear distortions of them (the classic device of Kang & Schafer,
//! 2007, for studying misspecification): models fit on the latent columns
//! are correctly specified, models fit on the observed columns are not.
//! Both blocks are exposed as dataset columns (`x1..x4`, then `z1..z4`) so
//! a scenario can point each nuisance at either.

use rand::distributions::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{z_to_x_transform, Dataset, MissingnessRegime, ObservedSample};
use crate::error::{Error, Result};
use crate::numerics::{sigmoid, RandomSource};

/// Covariate column indices of the observed (nonlinear) block.
pub const X_COLUMNS: [usize; 4] = [0, 1, 2, 3];
/// Covariate column indices of the latent block.
pub const Z_COLUMNS: [usize; 4] = [4, 5, 6, 7];

/// Baseline outcome level; also the centering constant for the
/// outcome-dependent missingness logit.
pub const OUTCOME_CENTER: f64 = 210.0;

/// How the outcome enters the hard-regime missingness logit.
///
/// As written, `0.3 * y` with outcomes near 210 saturates the logit and the
/// outcome is essentially always observed, degenerating the regime; that
/// pathology is kept available behind this switch. Centering (`y - 210`)
/// keeps both observation states populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Y1Centering {
    AsWritten,
    Centered,
}

impl Y1Centering {
    pub fn as_str(&self) -> &'static str {
        match self {
            Y1Centering::AsWritten => "as-written",
            Y1Centering::Centered => "centered",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "as-written" => Ok(Y1Centering::AsWritten),
            "centered" => Ok(Y1Centering::Centered),
            other => Err(Error::InvalidConfig(format!("unknown y1 centering '{other}'"))),
        }
    }

    #[inline]
    pub fn shift(&self, y: f64) -> f64 {
        match self {
            Y1Centering::AsWritten => y,
            Y1Centering::Centered => y - OUTCOME_CENTER,
        }
    }
}

/// Parameters of one synthetic dataset.
#[derive(Debug, Clone)]
pub struct DgpConfig {
    pub n: usize,
    pub theta_star: f64,
    pub regime: MissingnessRegime,
    pub y1_centering: Y1Centering,
    pub seed: u64,
}

impl DgpConfig {
    pub fn new(n: usize, regime: MissingnessRegime, seed: u64) -> Self {
        Self { n, theta_star: 5.0, regime, y1_centering: Y1Centering::Centered, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 50 {
            return Err(Error::InvalidConfig(format!("simulation needs n >= 50, got {}", self.n)));
        }
        if !self.theta_star.is_finite() {
            return Err(Error::InvalidConfig("theta_star must be finite".into()));
        }
        Ok(())
    }
}

/// Ground truth retained next to the public dataset: latent covariates, the
/// full outcome vectors, and both potential outcomes. Only the oracle view
/// knows what was blanked.
#[derive(Debug, Clone)]
pub struct OracleView {
    pub z: Vec<[f64; 4]>,
    pub y0: Vec<f64>,
    /// Untreated potential outcome at time 1.
    pub y1_control: Vec<f64>,
    /// Treated potential outcome at time 1 (constant shift of the untreated one).
    pub y1_treated: Vec<f64>,
    pub theta_star: f64,
}

impl OracleView {
    /// Sample ATT among treated units; exact because the effect is constant.
    pub fn sample_att(&self, data: &Dataset) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (i, s) in data.samples().iter().enumerate() {
            if s.a {
                sum += self.y1_treated[i] - self.y1_control[i];
                count += 1;
            }
        }
        sum / count as f64
    }

    /// The same units with every outcome observed: the complete-data twin
    /// used by reduction and efficiency comparisons.
    pub fn completed_dataset(&self, data: &Dataset) -> Result<Dataset> {
        let samples: Vec<ObservedSample> = data
            .samples()
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let y1 = if s.a { self.y1_treated[i] } else { self.y1_control[i] };
                ObservedSample::new(s.x.clone(), s.a, true, Some(self.y0[i]), true, Some(y1))
            })
            .collect::<Result<_>>()?;
        Dataset::new(samples, data.regime(), data.column_names().to_vec())
    }
}

/// Conditional mean of the baseline outcome given the latent covariates.
#[inline]
pub fn outcome_mean(z: &[f64; 4]) -> f64 {
    OUTCOME_CENTER + 27.4 * z[0] + 13.7 * z[1] + 13.7 * z[2] + 13.7 * z[3]
}

/// True propensity logit.
#[inline]
pub fn propensity_logit(z: &[f64; 4]) -> f64 {
    -z[0] + 0.5 * z[1] - 0.25 * z[2] - 0.1 * z[3]
}

/// Covariate/treatment part of the missingness logit (shared by every
/// regime; the hard regimes add an outcome term on top).
#[inline]
pub fn missingness_logit_base(z: &[f64; 4], a: bool) -> f64 {
    -0.25 * z[0] - 0.1 * z[1] - 0.5 * z[2] + 0.3 * z[3] - if a { 0.2 } else { 0.0 }
}

/// Generate one dataset and its sealed oracle view. `stream_id` selects an
/// independent random stream for the same seed, so replications are
/// reproducible in parallel.
pub fn generate(config: &DgpConfig, stream_id: u64) -> Result<(Dataset, OracleView)> {
    config.validate()?;
    let mut rng = RandomSource::new(config.seed).stream(stream_id).rng();
    let n = config.n;
    let theta = config.theta_star;
    let regime = config.regime;

    let mut samples = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    let mut y0_full = Vec::with_capacity(n);
    let mut y1_control_full = Vec::with_capacity(n);
    let mut y1_treated_full = Vec::with_capacity(n);

    for _ in 0..n {
        let z = [
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        ];
        let eps0: f64 = StandardNormal.sample(&mut rng);
        let eps1: f64 = StandardNormal.sample(&mut rng);
        let u_a: f64 = rng.gen();
        let u_r0: f64 = rng.gen();
        let u_r1: f64 = rng.gen();

        let x4 = z_to_x_transform(&z);
        let a = u_a < sigmoid(propensity_logit(&z));

        let y0 = outcome_mean(&z) + eps0;
        let y1_control = y0 + eps1;
        let y1_treated = y1_control + theta;
        let y1 = if a { y1_treated } else { y1_control };

        let base = missingness_logit_base(&z, a);
        let (r0, r1) = match regime {
            MissingnessRegime::PreSimple => (u_r0 < sigmoid(base), true),
            MissingnessRegime::PreHard => {
                (u_r0 < sigmoid(base + 0.3 * config.y1_centering.shift(y1)), true)
            }
            MissingnessRegime::PostSimple => (true, u_r1 < sigmoid(base)),
            MissingnessRegime::PostHard => {
                (true, u_r1 < sigmoid(base + 0.3 * config.y1_centering.shift(y0)))
            }
            MissingnessRegime::BothSimple => (u_r0 < sigmoid(base), u_r1 < sigmoid(base)),
        };

        let mut x = Vec::with_capacity(8);
        x.extend_from_slice(&x4);
        x.extend_from_slice(&z);
        samples.push(ObservedSample::new(
            x,
            a,
            r0,
            r0.then_some(y0),
            r1,
            r1.then_some(y1),
        )?);
        zs.push(z);
        y0_full.push(y0);
        y1_control_full.push(y1_control);
        y1_treated_full.push(y1_treated);
    }

    let names = vec![
        "x1".into(),
        "x2".into(),
        "x3".into(),
        "x4".into(),
        "z1".into(),
        "z2".into(),
        "z3".into(),
        "z4".into(),
    ];
    let dataset = Dataset::new(samples, regime, names)?;
    let oracle = OracleView {
        z: zs,
        y0: y0_full,
        y1_control: y1_control_full,
        y1_treated: y1_treated_full,
        theta_star: theta,
    };
    Ok((dataset, oracle))
}
