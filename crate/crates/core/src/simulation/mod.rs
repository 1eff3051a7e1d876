//! Monte Carlo laboratory: data-generating process, misspecification
//! scenarios, replication driver, and report emission.

mod dgp;
mod monte_carlo;
mod oracle;
mod report;
mod scenario;

pub use dgp::{
    generate, missingness_logit_base, outcome_mean, propensity_logit, DgpConfig, OracleView,
    Y1Centering, OUTCOME_CENTER, X_COLUMNS, Z_COLUMNS,
};
pub use monte_carlo::{
    run_monte_carlo, summarize, MonteCarloConfig, RepRecord, ScenarioMetrics, ScenarioResult,
    SimulationReport, FAILURE_BUDGET,
};
pub use oracle::TrueNuisances;
pub use report::{
    emit_report, read_reps_csv, render_markdown, render_markdown_from_reps, RepRow, ReportFiles,
};
pub use scenario::ScenarioSpec;
