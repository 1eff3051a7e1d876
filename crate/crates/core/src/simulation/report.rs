//! Report files: a metrics table per regime plus a long-format
//! per-replication file suitable for external plotting, and markdown
//! mirrors. Formatting is fixed so identical sweeps produce byte-identical
//! files.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::data::MissingnessRegime;
use crate::error::{Error, Result};
use crate::simulation::monte_carlo::{summarize, RepRecord, ScenarioMetrics, SimulationReport};
use crate::simulation::scenario::ScenarioSpec;

fn flag_mark(correct: bool) -> &'static str {
    if correct {
        "1"
    } else {
        "0"
    }
}

fn flag_symbol(correct: bool) -> &'static str {
    if correct {
        "yes"
    } else {
        "no"
    }
}

fn fmt_metric(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.6}")
    }
}

/// Paths produced by [`emit_report`].
#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub metrics_csv: PathBuf,
    pub reps_csv: PathBuf,
    pub markdown: PathBuf,
}

/// Write `report_<regime>.csv`, `reps_<regime>.csv`, and the markdown mirror
/// into `dir`.
pub fn emit_report(report: &SimulationReport, dir: impl AsRef<Path>) -> Result<ReportFiles> {
    if report.scenarios.is_empty() {
        return Err(Error::InvalidConfig("report has no scenarios".into()));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let regime = report.regime.as_str();
    let metrics_csv = dir.join(format!("report_{regime}.csv"));
    let reps_csv = dir.join(format!("reps_{regime}.csv"));
    let markdown = dir.join(format!("report_{regime}.md"));

    let flag_names = ScenarioSpec::flag_names(report.regime);

    let mut out = String::new();
    out.push_str(&flag_names.join(","));
    out.push_str(",mae,bias,rmse,mse,sd,coverage,reps,failures\n");
    for s in &report.scenarios {
        let flags: Vec<&str> = s.spec.flags().iter().map(|&f| flag_mark(f)).collect();
        out.push_str(&flags.join(","));
        let m = &s.metrics;
        out.push_str(&format!(
            ",{},{},{},{},{},{},{},{}\n",
            fmt_metric(m.mae),
            fmt_metric(m.bias),
            fmt_metric(m.rmse),
            fmt_metric(m.mse),
            fmt_metric(m.sd),
            fmt_metric(m.coverage),
            m.reps_done,
            m.failures
        ));
    }
    write_atomic(&metrics_csv, &out)?;

    let mut out = String::new();
    out.push_str("scenario,rep,theta_hat,std_err,covered\n");
    for s in &report.scenarios {
        for r in &s.reps {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.pattern,
                r.rep,
                r.theta_hat,
                r.std_err,
                if r.covered { 1 } else { 0 }
            ));
        }
    }
    write_atomic(&reps_csv, &out)?;

    write_atomic(&markdown, &render_markdown(report))?;

    Ok(ReportFiles { metrics_csv, reps_csv, markdown })
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

/// Markdown mirror of the metrics table.
pub fn render_markdown(report: &SimulationReport) -> String {
    let flag_names = ScenarioSpec::flag_names(report.regime);
    let mut out = String::new();
    out.push_str(&format!(
        "# Simulation report: {} (n = {}, reps = {}, J = {}, seed = {})\n\n",
        report.regime, report.n, report.reps, report.folds, report.seed
    ));
    out.push_str(&format!(
        "theta_star = {}, y1_centering = {}, clip = {}, eta_mode = {}, alpha = {}\n\n",
        report.theta_star,
        report.y1_centering.as_str(),
        report.clip_xi,
        report.eta_mode.as_str(),
        report.alpha
    ));
    render_markdown_table(&mut out, flag_names, report.scenarios.iter().map(|s| {
        (s.spec.flags(), s.metrics.clone(), s.invalid)
    }));
    out
}

fn render_markdown_table(
    out: &mut String,
    flag_names: &[&str],
    rows: impl Iterator<Item = (Vec<bool>, ScenarioMetrics, bool)>,
) {
    out.push_str("| ");
    out.push_str(&flag_names.join(" | "));
    out.push_str(" | MAE | Bias | RMSE | MSE | SD | Coverage | Reps | Failures |\n");
    out.push_str(&"|---".repeat(flag_names.len() + 8));
    out.push_str("|\n");
    for (flags, m, invalid) in rows {
        out.push_str("| ");
        let marks: Vec<&str> = flags.iter().map(|&f| flag_symbol(f)).collect();
        out.push_str(&marks.join(" | "));
        out.push_str(&format!(
            " | {} | {} | {} | {} | {} | {} | {} | {}{} |\n",
            fmt_metric(m.mae),
            fmt_metric(m.bias),
            fmt_metric(m.rmse),
            fmt_metric(m.mse),
            fmt_metric(m.sd),
            fmt_metric(m.coverage),
            m.reps_done,
            m.failures,
            if invalid { " (invalid)" } else { "" }
        ));
    }
}

/// A parsed row of a per-replication file.
#[derive(Debug, Clone)]
pub struct RepRow {
    pub scenario: String,
    pub record: RepRecord,
}

/// Read a `reps_<regime>.csv` file back.
pub fn read_reps_csv(path: impl AsRef<Path>) -> Result<Vec<RepRow>> {
    let content = std::fs::read_to_string(path.as_ref())?;
    let mut lines = content.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::SchemaError("empty replication file".into()))?;
    if header.trim() != "scenario,rep,theta_hat,std_err,covered" {
        return Err(Error::SchemaError(format!("unexpected replication header '{header}'")));
    }
    let mut rows = Vec::new();
    for (no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::SchemaError(format!(
                "replication row {no}: expected 5 fields, got {}",
                fields.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::SchemaError(format!("replication row {no}: bad {what} '{s}'")))
        };
        let rep: u32 = fields[1]
            .parse()
            .map_err(|_| Error::SchemaError(format!("replication row {no}: bad rep '{}'", fields[1])))?;
        let covered = match fields[4].trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::SchemaError(format!(
                    "replication row {no}: covered must be 0/1, got '{other}'"
                )))
            }
        };
        rows.push(RepRow {
            scenario: fields[0].to_string(),
            record: RepRecord {
                rep,
                theta_hat: parse_f(fields[2], "theta_hat")?,
                std_err: parse_f(fields[3], "std_err")?,
                covered,
            },
        });
    }
    if rows.is_empty() {
        return Err(Error::SchemaError("no replications in file".into()));
    }
    Ok(rows)
}

/// Re-render the summary table from a per-replication file, without
/// re-running any estimation.
pub fn render_markdown_from_reps(regime: MissingnessRegime, rows: &[RepRow], theta_star: f64) -> Result<String> {
    let mut order: Vec<String> = Vec::new();
    for row in rows {
        if !order.contains(&row.scenario) {
            order.push(row.scenario.clone());
        }
    }
    let mut out = String::new();
    out.push_str(&format!(
        "# Simulation summary: {} (recomputed from {} replications, theta_star = {})\n\n",
        regime,
        rows.len(),
        theta_star
    ));
    let flag_names = ScenarioSpec::flag_names(regime);
    let table_rows: Vec<(Vec<bool>, ScenarioMetrics, bool)> = order
        .iter()
        .map(|pattern| {
            let spec = ScenarioSpec::parse_pattern(regime, pattern)?;
            let recs: Vec<RepRecord> = rows
                .iter()
                .filter(|r| &r.scenario == pattern)
                .map(|r| r.record.clone())
                .collect();
            Ok((spec.flags(), summarize(&recs, 0, theta_star), false))
        })
        .collect::<Result<_>>()?;
    render_markdown_table(&mut out, flag_names, table_rows.into_iter());
    Ok(out)
}
