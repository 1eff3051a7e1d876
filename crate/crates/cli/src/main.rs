//! Command-line driver: estimate the ATT from a CSV, run the Monte Carlo
//! study, or re-render a report from stored replications.
//!
//! Exit codes are a stable contract: 0 success, 2 usage/configuration/schema
//! problems, 3 estimation failures, 4 simulation scenarios invalidated by
//! the failure budget. Results go to stdout as JSON or markdown; logs go to
//! stderr. Every flag can also come from a `DIDMAR_*` environment variable,
//! and a JSON configuration file is merged underneath the flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use didmar_core::data::{load_csv, CsvSchema, FeatureMap, MissingnessRegime};
use didmar_core::error::Error;
use didmar_core::estimators::{cross_fit_att, efficiency_gap, EstimatorConfig};
use didmar_core::nuisance::{fit_nuisances, EtaMode, NuisanceSpec, DEFAULT_CLIP_XI};
use didmar_core::simulation::{
    emit_report, read_reps_csv, render_markdown, render_markdown_from_reps, run_monte_carlo,
    MonteCarloConfig, ScenarioSpec, Y1Centering,
};

const EXIT_USAGE: u8 = 2;
const EXIT_ESTIMATION: u8 = 3;
const EXIT_INVALID_SCENARIO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "didmar",
    about = "Difference-in-differences ATT estimation with outcomes missing at random",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the ATT from a CSV dataset; prints a JSON result.
    Estimate(EstimateArgs),
    /// Run the Monte Carlo study and write report files.
    Simulate(SimulateArgs),
    /// Re-render a summary from a stored per-replication file.
    Report(ReportArgs),
}

#[derive(Args)]
struct SharedArgs {
    /// Missingness regime: pre-simple, pre-hard, post-simple, post-hard, both.
    #[arg(long, env = "DIDMAR_REGIME")]
    regime: Option<String>,
    /// Cross-fitting folds J.
    #[arg(long, env = "DIDMAR_FOLDS")]
    folds: Option<usize>,
    #[arg(long, env = "DIDMAR_SEED")]
    seed: Option<u64>,
    /// Probability clipping bound (0, 0.5).
    #[arg(long, env = "DIDMAR_CLIP")]
    clip: Option<f64>,
    /// Two-sided confidence level is 1 - alpha.
    #[arg(long, env = "DIDMAR_ALPHA")]
    alpha: Option<f64>,
    /// Nested-regression mode: plain or augmented.
    #[arg(long = "eta-mode", env = "DIDMAR_ETA_MODE")]
    eta_mode: Option<String>,
    /// JSON configuration file merged underneath the flags.
    #[arg(long, env = "DIDMAR_CONFIG")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// Input CSV (columns: covariates, a, r0, y0, r1, y1).
    #[arg(long, env = "DIDMAR_DATA")]
    data: Option<PathBuf>,
    /// Write per-sample influence values to this CSV.
    #[arg(long = "if-out")]
    if_out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// Sample size per replication.
    #[arg(long, env = "DIDMAR_N")]
    n: Option<usize>,
    /// Number of replications per scenario.
    #[arg(long, env = "DIDMAR_REPS")]
    reps: Option<usize>,
    /// Scenario selection: 'all' or comma-separated patterns like ccc,cxx.
    #[arg(long, env = "DIDMAR_SCENARIO")]
    scenario: Option<String>,
    /// Hard-regime missingness logit outcome term: as-written or centered.
    #[arg(long = "y1-centering", env = "DIDMAR_Y1_CENTERING")]
    y1_centering: Option<String>,
    /// Worker threads for replications.
    #[arg(long, env = "DIDMAR_JOBS")]
    jobs: Option<usize>,
    /// True effect used by the generator.
    #[arg(long = "theta-star", env = "DIDMAR_THETA_STAR")]
    theta_star: Option<f64>,
    /// Output directory for report files.
    #[arg(long, env = "DIDMAR_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Per-replication CSV produced by `simulate`.
    #[arg(long)]
    reps: Option<PathBuf>,
    /// Regime the file belongs to (sets the flag column layout).
    #[arg(long, env = "DIDMAR_REGIME")]
    regime: Option<String>,
    /// True effect for recomputed error metrics.
    #[arg(long = "theta-star")]
    theta_star: Option<f64>,
    /// Write the markdown here as well as stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Optional JSON configuration; every field is overridden by the matching
/// flag when that flag is given.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    regime: Option<String>,
    folds: Option<usize>,
    seed: Option<u64>,
    clip: Option<f64>,
    alpha: Option<f64>,
    eta_mode: Option<String>,
    data: Option<PathBuf>,
    n: Option<usize>,
    reps: Option<usize>,
    scenario: Option<String>,
    y1_centering: Option<String>,
    jobs: Option<usize>,
    theta_star: Option<f64>,
    out: Option<PathBuf>,
    /// Covariate column names for each nuisance's feature map; defaults to
    /// every covariate column.
    mu_features: Option<Vec<String>>,
    pi_features: Option<Vec<String>>,
    gamma_features: Option<Vec<String>>,
    eta_features: Option<Vec<String>>,
    /// Renames for the special columns.
    columns: Option<ColumnNames>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnNames {
    a: Option<String>,
    r0: Option<String>,
    y0: Option<String>,
    r1: Option<String>,
    y1: Option<String>,
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig, Error> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("config file {}: {e}", p.display())))
        }
    }
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::SchemaError(_)
        | Error::ConsistencyError { .. }
        | Error::EmptyGroup(_)
        | Error::InvalidFoldCount { .. }
        | Error::InvalidConfig(_)
        | Error::Io(_)
        | Error::Csv(_) => EXIT_USAGE,
        Error::FitFailure { .. }
        | Error::EmptyCell(_)
        | Error::RankDeficient { .. }
        | Error::DimensionMismatch { .. }
        | Error::MissingInput(_)
        | Error::InvalidProbability(_)
        | Error::RegimeMismatch { .. }
        | Error::NonFiniteResult(_) => EXIT_ESTIMATION,
    }
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_for(&err))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => fail(err),
    }
}

struct ResolvedShared {
    regime: MissingnessRegime,
    folds: usize,
    seed: u64,
    clip: f64,
    alpha: f64,
    eta_mode: EtaMode,
}

fn resolve_shared(shared: &SharedArgs, file: &FileConfig) -> Result<ResolvedShared, Error> {
    let regime_str = shared
        .regime
        .clone()
        .or_else(|| file.regime.clone())
        .ok_or_else(|| Error::InvalidConfig("--regime is required".into()))?;
    let eta_mode = match shared.eta_mode.clone().or_else(|| file.eta_mode.clone()) {
        Some(s) => EtaMode::parse(&s)?,
        None => EtaMode::Augmented,
    };
    Ok(ResolvedShared {
        regime: MissingnessRegime::parse(&regime_str)?,
        folds: shared.folds.or(file.folds).unwrap_or(5),
        seed: shared.seed.or(file.seed).unwrap_or(0),
        clip: shared.clip.or(file.clip).unwrap_or(DEFAULT_CLIP_XI),
        alpha: shared.alpha.or(file.alpha).unwrap_or(0.05),
        eta_mode,
    })
}

fn feature_map_from_names(
    names: &Option<Vec<String>>,
    data: &didmar_core::Dataset,
    what: &str,
) -> Result<FeatureMap, Error> {
    match names {
        None => Ok(FeatureMap::raw((0..data.p()).collect())),
        Some(cols) => {
            let idx: Vec<usize> = cols
                .iter()
                .map(|name| {
                    data.column_index(name).ok_or_else(|| {
                        Error::InvalidConfig(format!("{what}: unknown covariate column '{name}'"))
                    })
                })
                .collect::<Result<_, Error>>()?;
            Ok(FeatureMap::raw(idx))
        }
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<ExitCode, Error> {
    let file = load_file_config(&args.shared.config)?;
    let shared = resolve_shared(&args.shared, &file)?;
    let data_path = args
        .data
        .clone()
        .or_else(|| file.data.clone())
        .ok_or_else(|| Error::InvalidConfig("--data is required".into()))?;

    let mut schema = CsvSchema::default();
    if let Some(cols) = &file.columns {
        if let Some(v) = &cols.a {
            schema.a = v.clone();
        }
        if let Some(v) = &cols.r0 {
            schema.r0 = v.clone();
        }
        if let Some(v) = &cols.y0 {
            schema.y0 = v.clone();
        }
        if let Some(v) = &cols.r1 {
            schema.r1 = v.clone();
        }
        if let Some(v) = &cols.y1 {
            schema.y1 = v.clone();
        }
    }

    let dataset = load_csv(&data_path, &schema, shared.regime)?;
    eprintln!(
        "loaded {} samples ({} covariates) from {}",
        dataset.len(),
        dataset.p(),
        data_path.display()
    );

    let spec = NuisanceSpec {
        mu_map: feature_map_from_names(&file.mu_features, &dataset, "mu_features")?,
        pi_map: feature_map_from_names(&file.pi_features, &dataset, "pi_features")?,
        gamma_map: feature_map_from_names(&file.gamma_features, &dataset, "gamma_features")?,
        eta_map: feature_map_from_names(&file.eta_features, &dataset, "eta_features")?,
        eta_mode: shared.eta_mode,
        clip_xi: shared.clip,
    };
    let config = EstimatorConfig {
        regime: shared.regime,
        folds: shared.folds,
        seed: shared.seed,
        nuisance_spec: spec.clone(),
        alpha: shared.alpha,
    };

    let mut result = cross_fit_att(&dataset, &config)?;

    // Efficiency-loss diagnostic for the pre-treatment regimes, from a
    // full-sample nuisance fit; omitted (null) when it cannot be computed.
    if matches!(
        shared.regime,
        MissingnessRegime::PreSimple | MissingnessRegime::PreHard
    ) {
        let idx: Vec<usize> = (0..dataset.len()).collect();
        let eta_idx: Vec<usize> = if shared.regime.is_hard() {
            idx.iter().copied().filter(|i| i % 2 == 1).collect()
        } else {
            Vec::new()
        };
        let terms = fit_nuisances(&dataset, &idx, &eta_idx, &spec)
            .and_then(|set| efficiency_gap(&dataset, &set, &spec, shared.regime))
            .map(|gap| gap.terms)
            .ok();
        if let Some(terms) = terms {
            result = result.with_efficiency_gap(terms);
        }
    }

    let flags_healthy = result
        .diagnostics
        .fit_flags
        .iter()
        .flatten()
        .all(|f| f.healthy());

    let output = json!({
        "theta_hat": result.theta_hat,
        "std_err": result.std_err,
        "ci_lo": result.ci.0,
        "ci_hi": result.ci.1,
        "n": result.n,
        "J": config.folds,
        "regime": shared.regime.as_str(),
        "alpha": shared.alpha,
        "clip_xi": shared.clip,
        "eta_mode": shared.eta_mode.as_str(),
        "seed": shared.seed,
        "fold_estimates": result.fold_estimates,
        "p_hat": result.p_hat,
        "diagnostics": {
            "simple_fold_average": result.diagnostics.simple_fold_average,
            "estimating_eq_residual": result.diagnostics.estimating_eq_residual,
            "residual_scale": result.diagnostics.residual_scale,
            "fold_sizes": result.diagnostics.fold_sizes,
            "fold_treated": result.diagnostics.fold_treated,
            "all_fits_healthy": flags_healthy,
            "efficiency_gap": result.diagnostics.efficiency_gap,
        },
    });
    println!("{}", serde_json::to_string_pretty(&output).expect("serialize result"));

    if let Some(path) = &args.if_out {
        let mut out = String::from("index,if_value\n");
        for (i, v) in result.if_values.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        std::fs::write(path, out)?;
        eprintln!("wrote influence values to {}", path.display());
    }

    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let file = load_file_config(&args.shared.config)?;
    let shared = resolve_shared(&args.shared, &file)?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| file.out.clone())
        .ok_or_else(|| Error::InvalidConfig("--out directory is required".into()))?;
    let n = args.n.or(file.n).unwrap_or(2000);
    let reps = args.reps.or(file.reps).unwrap_or(500);
    let theta_star = args.theta_star.or(file.theta_star).unwrap_or(5.0);
    let y1_centering = match args.y1_centering.clone().or_else(|| file.y1_centering.clone()) {
        Some(s) => Y1Centering::parse(&s)?,
        None => Y1Centering::Centered,
    };
    let jobs = args.jobs.or(file.jobs);

    let scenario_arg = args.scenario.clone().or_else(|| file.scenario.clone());
    let grid: Vec<ScenarioSpec> = match scenario_arg.as_deref() {
        None | Some("all") => ScenarioSpec::full_grid(shared.regime),
        Some(patterns) => patterns
            .split(',')
            .map(|p| ScenarioSpec::parse_pattern(shared.regime, p.trim()))
            .collect::<Result<_, Error>>()?,
    };

    let config = MonteCarloConfig {
        regime: shared.regime,
        grid,
        reps,
        n,
        folds: shared.folds,
        seed: shared.seed,
        theta_star,
        y1_centering,
        clip_xi: shared.clip,
        eta_mode: shared.eta_mode,
        alpha: shared.alpha,
        jobs,
    };

    eprintln!(
        "simulating {} scenarios x {} replications at n = {} (regime {}, seed {})",
        config.grid.len(),
        reps,
        n,
        shared.regime,
        shared.seed
    );
    let report = run_monte_carlo(&config)?;
    let files = emit_report(&report, &out_dir)?;
    eprintln!(
        "wrote {}, {}, {}",
        files.metrics_csv.display(),
        files.reps_csv.display(),
        files.markdown.display()
    );
    print!("{}", render_markdown(&report));

    if report.any_invalid() {
        eprintln!("error: at least one scenario exceeded the failure budget");
        return Ok(ExitCode::from(EXIT_INVALID_SCENARIO));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode, Error> {
    let reps_path = args
        .reps
        .ok_or_else(|| Error::InvalidConfig("--reps file is required".into()))?;
    let regime_str = args
        .regime
        .ok_or_else(|| Error::InvalidConfig("--regime is required".into()))?;
    let regime = MissingnessRegime::parse(&regime_str)?;
    let theta_star = args.theta_star.unwrap_or(5.0);

    let rows = read_reps_csv(&reps_path)?;
    let markdown = render_markdown_from_reps(regime, &rows, theta_star)?;
    if let Some(out) = &args.out {
        std::fs::write(out, &markdown)?;
        eprintln!("wrote {}", out.display());
    }
    print!("{markdown}");
    Ok(ExitCode::SUCCESS)
}
