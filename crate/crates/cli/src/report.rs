//! Self-describing reports and tidy tables.

use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};

/// Rows for CSV output; every cell is already formatted.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// A named pass/fail measurement against a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value ≤ tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// What a command hands back to the driver.
pub struct Outcome {
    pub passed: bool,
    pub results: serde_json::Value,
    pub table: Table,
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    /// `sha256("config <len>\0" + canonical config JSON)`.
    pub config_hash: String,
    pub passed: bool,
    pub results: &'a serde_json::Value,
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let body = serde_json::to_string(cfg).expect("config serializes");
    let mut h = Sha256::new();
    h.update(format!("config {}\0", body.len()));
    h.update(body);
    hex::encode(h.finalize())
}

pub fn write_outcome(cfg: &RunConfig, outcome: &Outcome, mut w: impl Write) -> std::io::Result<()> {
    match cfg.format {
        Format::Json => {
            let report = Report {
                tool: "bo-nfr",
                version: env!("CARGO_PKG_VERSION"),
                config: cfg,
                config_hash: config_hash(cfg),
                passed: outcome.passed,
                results: &outcome.results,
            };
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)
        }
        Format::Csv => outcome.table.write(w),
    }
}

/// Shortest round-trip representation, so CSV cells are exact; exponent
/// form outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
