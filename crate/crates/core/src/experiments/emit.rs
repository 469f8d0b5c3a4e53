//! CSV and JSON result files.
//!
//! CSV columns, in order:
//! `axis,overlay,coverage,coverage_ci,ceu_density,ceu_density_ci,analytical_pe,n_drops,seed`.
//! Missing values (no overlay, classification-only coverage, failed
//! quadrature) are empty fields. Floats use Rust's shortest round-trip
//! formatting, independent of locale.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SweepResult, SweepRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "axis",
    "overlay",
    "coverage",
    "coverage_ci",
    "ceu_density",
    "ceu_density_ci",
    "analytical_pe",
    "n_drops",
    "seed",
];

pub const ARTIFACT: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn record(row: &SweepRow) -> [String; 9] {
    [
        row.axis.to_string(),
        opt(row.overlay),
        opt(row.coverage),
        opt(row.coverage_ci),
        row.ceu_density.to_string(),
        row.ceu_density_ci.to_string(),
        opt(row.analytical_pe),
        row.n_drops.to_string(),
        row.seed.to_string(),
    ]
}

/// Writes the CSV table to any writer.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &result.rows {
        w.write_record(record(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub artifact: String,
    pub version: String,
    pub spec: super::SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument {
    pub metadata: Metadata,
    pub rows: Vec<SweepRow>,
}

impl JsonDocument {
    pub fn from_result(result: &SweepResult) -> Self {
        JsonDocument {
            metadata: Metadata {
                artifact: ARTIFACT.to_string(),
                version: VERSION.to_string(),
                spec: result.spec.clone(),
            },
            rows: result.rows.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

pub fn to_json_string(result: &SweepResult) -> String {
    serde_json::to_string_pretty(&JsonDocument::from_result(result)).expect("sweep results serialize")
}

/// Writes `result` to `path`.
pub fn emit(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv_string(result),
        Format::Json => to_json_string(result) + "\n",
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Long-format plot data: one line per (series, x, metric).
pub fn write_plot_csv(result: &SweepResult, figure: &str, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let io_err = |e: csv::Error| Error::io(path, std::io::Error::other(e.to_string()));
    w.write_record(["figure", "series_axis", "series", "x_axis", "x", "metric", "value", "ci"])
        .map_err(io_err)?;
    let series_axis = result.spec.overlay.as_ref().map(|o| o.axis.name()).unwrap_or("");
    let x_axis = result.spec.axis.name();
    for row in &result.rows {
        let mut metrics = Vec::new();
        if let (Some(c), Some(ci)) = (row.coverage, row.coverage_ci) {
            metrics.push(("coverage", c.to_string(), ci.to_string()));
        }
        metrics.push(("ceu_density", row.ceu_density.to_string(), row.ceu_density_ci.to_string()));
        if let Some(pe) = row.analytical_pe {
            metrics.push(("analytical_pe", pe.to_string(), String::new()));
        }
        for (metric, value, ci) in metrics {
            w.write_record([
                figure,
                series_axis,
                &opt(row.overlay),
                x_axis,
                &row.axis.to_string(),
                metric,
                &value,
                &ci,
            ])
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
