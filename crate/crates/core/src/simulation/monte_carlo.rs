//! Replication driver and metric accumulation.
//!
//! Each (scenario, replication) task is keyed by its own random stream, so
//! results are bit-identical for a given seed no matter how many worker
//! threads run them. Reduction happens in task-index order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::MissingnessRegime;
use crate::error::{Error, Result};
use crate::estimators::{cross_fit_att, EstimatorConfig};
use crate::nuisance::EtaMode;
use crate::simulation::dgp::{generate, DgpConfig, Y1Centering};
use crate::simulation::scenario::ScenarioSpec;

/// Share of failed replications a scenario may absorb before it is marked
/// invalid.
pub const FAILURE_BUDGET: f64 = 0.05;

/// Monte Carlo sweep configuration.
#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub regime: MissingnessRegime,
    pub grid: Vec<ScenarioSpec>,
    pub reps: usize,
    pub n: usize,
    pub folds: usize,
    pub seed: u64,
    pub theta_star: f64,
    pub y1_centering: Y1Centering,
    pub clip_xi: f64,
    pub eta_mode: EtaMode,
    pub alpha: f64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl MonteCarloConfig {
    pub fn new(regime: MissingnessRegime, grid: Vec<ScenarioSpec>, reps: usize, n: usize, seed: u64) -> Self {
        Self {
            regime,
            grid,
            reps,
            n,
            folds: 5,
            seed,
            theta_star: 5.0,
            y1_centering: Y1Centering::Centered,
            clip_xi: crate::nuisance::DEFAULT_CLIP_XI,
            eta_mode: EtaMode::Augmented,
            alpha: 0.05,
            jobs: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be >= 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("scenario grid must be non-empty".into()));
        }
        if self.grid.len() >= (1usize << 31) || self.reps >= (1usize << 32) {
            return Err(Error::InvalidConfig("grid or replication count too large".into()));
        }
        for s in &self.grid {
            s.validate()?;
            if s.regime != self.regime {
                return Err(Error::InvalidConfig(format!(
                    "scenario regime {} does not match sweep regime {}",
                    s.regime, self.regime
                )));
            }
        }
        if let Some(0) = self.jobs {
            return Err(Error::InvalidConfig("jobs must be >= 1".into()));
        }
        Ok(())
    }
}

/// One successful replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepRecord {
    pub rep: u32,
    pub theta_hat: f64,
    pub std_err: f64,
    pub covered: bool,
}

/// Summary metrics of one scenario over its replications.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    /// Mean absolute error of the point estimate.
    pub mae: f64,
    pub bias: f64,
    pub sd: f64,
    pub mse: f64,
    pub rmse: f64,
    pub coverage: f64,
    pub reps_done: usize,
    pub failures: usize,
}

/// One scenario's results.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub pattern: String,
    pub metrics: ScenarioMetrics,
    pub reps: Vec<RepRecord>,
    pub failures: Vec<(u32, String)>,
    /// True when failures exceeded the failure budget.
    pub invalid: bool,
    /// Largest normalized estimating-equation residual seen across
    /// replications: `|sum phi| / (n * max(1, mean |phi|))`.
    pub max_norm_residual: f64,
}

/// Full sweep output.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub regime: MissingnessRegime,
    pub n: usize,
    pub reps: usize,
    pub folds: usize,
    pub seed: u64,
    pub theta_star: f64,
    pub y1_centering: Y1Centering,
    pub clip_xi: f64,
    pub eta_mode: EtaMode,
    pub alpha: f64,
    pub scenarios: Vec<ScenarioResult>,
}

impl SimulationReport {
    pub fn any_invalid(&self) -> bool {
        self.scenarios.iter().any(|s| s.invalid)
    }
}

enum RepOutcome {
    Ok { record: RepRecord, norm_residual: f64 },
    Failed(String),
}

fn run_one(config: &MonteCarloConfig, scenario_idx: usize, rep: u32) -> RepOutcome {
    let stream = ((scenario_idx as u64) << 32) | rep as u64;
    let dgp = DgpConfig {
        n: config.n,
        theta_star: config.theta_star,
        regime: config.regime,
        y1_centering: config.y1_centering,
        seed: config.seed,
    };
    let generated = match generate(&dgp, stream) {
        Ok(g) => g,
        Err(e) => return RepOutcome::Failed(format!("generate: {e}")),
    };
    let (dataset, _oracle) = generated;

    let spec = config.grid[scenario_idx].nuisance_spec(config.clip_xi, config.eta_mode);
    let est_config = EstimatorConfig {
        regime: config.regime,
        folds: config.folds,
        seed: config.seed ^ stream.rotate_left(17) ^ 0xC0F1_7AB1E,
        nuisance_spec: spec,
        alpha: config.alpha,
    };
    match cross_fit_att(&dataset, &est_config) {
        Ok(result) => {
            let covered = result.ci.0 <= config.theta_star && config.theta_star <= result.ci.1;
            let norm_residual = result.diagnostics.estimating_eq_residual.abs()
                / (result.n as f64 * result.diagnostics.residual_scale.max(1.0));
            RepOutcome::Ok {
                record: RepRecord {
                    rep,
                    theta_hat: result.theta_hat,
                    std_err: result.std_err,
                    covered,
                },
                norm_residual,
            }
        }
        Err(e) => RepOutcome::Failed(format!("estimate: {e}")),
    }
}

/// Run the sweep. Deterministic for a given seed regardless of `jobs`.
pub fn run_monte_carlo(config: &MonteCarloConfig) -> Result<SimulationReport> {
    config.validate()?;
    let tasks: Vec<(usize, u32)> = (0..config.grid.len())
        .flat_map(|s| (0..config.reps as u32).map(move |r| (s, r)))
        .collect();

    let execute = || -> Vec<RepOutcome> {
        tasks
            .par_iter()
            .map(|&(s, r)| run_one(config, s, r))
            .collect()
    };
    let outcomes = match config.jobs {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?
            .install(execute),
        None => execute(),
    };

    let mut scenarios = Vec::with_capacity(config.grid.len());
    for (s_idx, spec) in config.grid.iter().enumerate() {
        let mut reps = Vec::new();
        let mut failures = Vec::new();
        let mut max_norm_residual = 0.0_f64;
        for r in 0..config.reps {
            match &outcomes[s_idx * config.reps + r] {
                RepOutcome::Ok { record, norm_residual } => {
                    max_norm_residual = max_norm_residual.max(*norm_residual);
                    reps.push(record.clone());
                }
                RepOutcome::Failed(msg) => failures.push((r as u32, msg.clone())),
            }
        }
        let metrics = summarize(&reps, failures.len(), config.theta_star);
        let invalid = (failures.len() as f64) > FAILURE_BUDGET * config.reps as f64;
        scenarios.push(ScenarioResult {
            spec: *spec,
            pattern: spec.pattern(),
            metrics,
            reps,
            failures,
            invalid,
            max_norm_residual,
        });
    }

    Ok(SimulationReport {
        regime: config.regime,
        n: config.n,
        reps: config.reps,
        folds: config.folds,
        seed: config.seed,
        theta_star: config.theta_star,
        y1_centering: config.y1_centering,
        clip_xi: config.clip_xi,
        eta_mode: config.eta_mode,
        alpha: config.alpha,
        scenarios,
    })
}

/// Metrics over successful replications. Uses the population variance so
/// that `mse = bias^2 + sd^2` holds as an identity.
pub fn summarize(reps: &[RepRecord], failures: usize, theta_star: f64) -> ScenarioMetrics {
    if reps.is_empty() {
        return ScenarioMetrics {
            mae: f64::NAN,
            bias: f64::NAN,
            sd: f64::NAN,
            mse: f64::NAN,
            rmse: f64::NAN,
            coverage: f64::NAN,
            reps_done: 0,
            failures,
        };
    }
    let n = reps.len() as f64;
    let devs: Vec<f64> = reps.iter().map(|r| r.theta_hat - theta_star).collect();
    let mae = devs.iter().map(|d| d.abs()).sum::<f64>() / n;
    let bias = devs.iter().sum::<f64>() / n;
    let var = devs.iter().map(|d| (d - bias) * (d - bias)).sum::<f64>() / n;
    let mse = devs.iter().map(|d| d * d).sum::<f64>() / n;
    let coverage = reps.iter().filter(|r| r.covered).count() as f64 / n;
    ScenarioMetrics {
        mae,
        bias,
        sd: var.sqrt(),
        mse,
        rmse: mse.sqrt(),
        coverage,
        reps_done: reps.len(),
        failures,
    }
}
