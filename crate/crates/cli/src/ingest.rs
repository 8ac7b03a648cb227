//! CSV ingestion of prices or returns.

use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};
use svnl_core::ReturnSeries;

use crate::error::{CliError, CliResult};

pub const MIN_USABLE_ROWS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    /// Closing prices; returns are `scale * diff(log p)`.
    Prices,
    /// Returns used as given.
    Returns,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestConfig {
    pub mode: InputMode,
    /// Ordering column. When the header lacks it, file order is used.
    pub date_column: String,
    pub value_column: String,
    pub return_scale: f64,
}

impl IngestConfig {
    pub fn new(mode: InputMode) -> Self {
        IngestConfig {
            mode,
            date_column: "date".into(),
            value_column: match mode {
                InputMode::Prices => "close".into(),
                InputMode::Returns => "y".into(),
            },
            return_scale: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub series: ReturnSeries,
    /// Rows with an empty date or value field.
    pub dropped_rows: usize,
    /// Rows kept before differencing.
    pub usable_rows: usize,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Reads a CSV with a header row into an ordered return series.
pub fn ingest(path: &Path, config: &IngestConfig) -> CliResult<Ingested> {
    if !(config.return_scale.is_finite() && config.return_scale > 0.0) {
        return Err(CliError::Config(format!("return scale must be positive, got {}", config.return_scale)));
    }
    let file = std::fs::File::open(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    ingest_reader(file, config)
}

pub fn ingest_reader<R: std::io::Read>(reader: R, config: &IngestConfig) -> CliResult<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| input(format!("unreadable header: {e}")))?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let value_idx = find(&config.value_column)
        .ok_or_else(|| input(format!("column {:?} not found in header", config.value_column)))?;
    let date_idx = find(&config.date_column);
    if date_idx.is_none() {
        log::info!("no {:?} column; using file order", config.date_column);
    }

    let mut rows: Vec<(String, f64)> = Vec::new();
    let mut dropped = 0;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| input(format!("line {line}: {e}")))?;
        let value = rec.get(value_idx).unwrap_or("");
        let label = match date_idx {
            Some(d) => rec.get(d).unwrap_or("").to_string(),
            None => (i + 1).to_string(),
        };
        if value.is_empty() || label.is_empty() {
            dropped += 1;
            continue;
        }
        let v: f64 = value.parse().map_err(|_| input(format!("line {line}: {value:?} is not a number")))?;
        if !v.is_finite() {
            return Err(input(format!("line {line}: non-finite value {value:?}")));
        }
        rows.push((label, v));
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} rows with missing values");
    }
    if rows.len() < MIN_USABLE_ROWS {
        return Err(input(format!("need at least {MIN_USABLE_ROWS} usable rows, got {}", rows.len())));
    }

    if date_idx.is_some() {
        let numeric = rows.iter().all(|(l, _)| l.parse::<f64>().is_ok());
        rows.sort_by(|a, b| compare_labels(&a.0, &b.0, numeric));
        if let Some(w) = rows.windows(2).find(|w| compare_labels(&w[0].0, &w[1].0, numeric) == Ordering::Equal) {
            return Err(input(format!("duplicate date {:?}", w[0].0)));
        }
    }

    let usable_rows = rows.len();
    let (labels, values): (Vec<String>, Vec<f64>) = match config.mode {
        InputMode::Returns => rows.into_iter().unzip(),
        InputMode::Prices => {
            if let Some((l, p)) = rows.iter().find(|(_, p)| *p <= 0.0) {
                return Err(input(format!("non-positive price {p} at {l:?}")));
            }
            rows.windows(2)
                .map(|w| (w[1].0.clone(), config.return_scale * (w[1].1.ln() - w[0].1.ln())))
                .unzip()
        }
    };
    let series = ReturnSeries::new(labels, values)?;
    Ok(Ingested { series, dropped_rows: dropped, usable_rows })
}

/// Numeric labels compare by value, others as strings (ISO dates sort correctly).
fn compare_labels(a: &str, b: &str, numeric: bool) -> Ordering {
    if numeric {
        a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap())
    } else {
        a.cmp(b)
    }
}
