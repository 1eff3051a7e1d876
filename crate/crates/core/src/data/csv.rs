//! CSV ingestion and export.
//!
//! Schema (header required): covariate columns, then `a`, `r0`, `y0`, `r1`,
//! `y1`. Indicators parse as 0/1; an outcome cell is empty exactly when its
//! indicator is 0. UTF-8, comma separators, `.` decimal point.

use std::path::Path;

use crate::data::sample::{Dataset, MissingnessRegime, ObservedSample};
use crate::error::{Error, Result};

/// Column-name mapping for the special (non-covariate) columns. Every header
/// column not named here is treated as a covariate, in file order.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub a: String,
    pub r0: String,
    pub y0: String,
    pub r1: String,
    pub y1: String,
    /// Restrict covariates to these named columns (in the given order). When
    /// absent, all remaining columns are used.
    pub covariates: Option<Vec<String>>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            a: "a".into(),
            r0: "r0".into(),
            y0: "y0".into(),
            r1: "r1".into(),
            y1: "y1".into(),
            covariates: None,
        }
    }
}

fn parse_indicator(field: &str, row: usize, what: &str) -> Result<bool> {
    match field.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::SchemaError(format!(
            "row {row}: {what} must be 0 or 1, got '{other}'"
        ))),
    }
}

fn parse_real(field: &str, row: usize, what: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::SchemaError(format!("row {row}: cannot parse {what} value '{field}'"))
    })
}

fn parse_outcome(field: &str, indicator: bool, row: usize, what: &str) -> Result<Option<f64>> {
    let trimmed = field.trim();
    match (indicator, trimmed.is_empty()) {
        (true, false) => Ok(Some(parse_real(trimmed, row, what)?)),
        (false, true) => Ok(None),
        (true, true) => Err(Error::ConsistencyError {
            row: Some(row),
            msg: format!("{what} is empty but its indicator is 1"),
        }),
        (false, false) => Err(Error::ConsistencyError {
            row: Some(row),
            msg: format!("{what} is non-empty but its indicator is 0"),
        }),
    }
}

/// Load and validate a dataset.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema, regime: MissingnessRegime) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path.as_ref())?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::SchemaError(format!("missing column '{name}'")))
    };
    let a_idx = find(&schema.a)?;
    let r0_idx = find(&schema.r0)?;
    let y0_idx = find(&schema.y0)?;
    let r1_idx = find(&schema.r1)?;
    let y1_idx = find(&schema.y1)?;
    let special = [a_idx, r0_idx, y0_idx, r1_idx, y1_idx];

    let (cov_idx, cov_names): (Vec<usize>, Vec<String>) = match &schema.covariates {
        Some(names) => {
            let idx: Vec<usize> = names.iter().map(|n| find(n)).collect::<Result<_>>()?;
            (idx, names.clone())
        }
        None => {
            let pairs: Vec<(usize, String)> = headers
                .iter()
                .enumerate()
                .filter(|(i, _)| !special.contains(i))
                .map(|(i, h)| (i, h.clone()))
                .collect();
            (pairs.iter().map(|(i, _)| *i).collect(), pairs.into_iter().map(|(_, h)| h).collect())
        }
    };
    if cov_idx.is_empty() {
        return Err(Error::SchemaError("no covariate columns".into()));
    }

    let mut samples = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| {
                Error::SchemaError(format!("row {row_no}: too few fields ({})", record.len()))
            })
        };
        let x: Vec<f64> = cov_idx
            .iter()
            .map(|&i| parse_real(field(i)?, row_no, "covariate"))
            .collect::<Result<_>>()?;
        let a = parse_indicator(field(a_idx)?, row_no, "a")?;
        let r0 = parse_indicator(field(r0_idx)?, row_no, "r0")?;
        let r1 = parse_indicator(field(r1_idx)?, row_no, "r1")?;
        let y0 = parse_outcome(field(y0_idx)?, r0, row_no, "y0")?;
        let y1 = parse_outcome(field(y1_idx)?, r1, row_no, "y1")?;
        let sample = ObservedSample::new(x, a, r0, y0, r1, y1).map_err(|e| match e {
            Error::ConsistencyError { msg, .. } => Error::ConsistencyError { row: Some(row_no), msg },
            other => other,
        })?;
        samples.push(sample);
    }

    Dataset::new(samples, regime, cov_names)
}

/// Write a dataset in the canonical schema. Missing outcomes are emitted as
/// empty cells; reals are written in shortest round-trip form, so a
/// write-then-load round trip reproduces samples bit-exactly.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<String> = dataset.column_names().to_vec();
    header.extend(["a", "r0", "y0", "r1", "y1"].map(String::from));
    writer.write_record(&header)?;

    let fmt_opt = |v: Option<f64>| v.map(|v| format!("{v}")).unwrap_or_default();
    for s in dataset.samples() {
        let mut record: Vec<String> = s.x.iter().map(|v| format!("{v}")).collect();
        record.push(if s.a { "1" } else { "0" }.into());
        record.push(if s.r0 { "1" } else { "0" }.into());
        record.push(fmt_opt(s.y0));
        record.push(if s.r1 { "1" } else { "0" }.into());
        record.push(fmt_opt(s.y1));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
