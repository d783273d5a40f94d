//! Scenario reports: `report.json` plus one CSV file per table.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use wlab_core::Verdict;

use crate::config::ScenarioConfig;
use crate::error::{io_err, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// One verdict with its declared expectation and the replayable record
/// (`{"op", "verdict", "witness", "params"}`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: Verdict,
    pub verdict: Verdict,
    pub record: Value,
}

impl Check {
    pub fn matches(&self) -> bool {
        self.verdict == self.expected
    }
}

/// Tolerances, seed and version of the run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stamp {
    pub version: &'static str,
    pub seed: u64,
    pub p: f64,
    pub tol: f64,
    pub eps: f64,
}

impl Stamp {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self { version: env!("CARGO_PKG_VERSION"), seed: cfg.seed, p: cfg.p, tol: cfg.tol, eps: cfg.eps }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub stamp: Stamp,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Set when a sub-operation aborted the scenario.
    pub error: Option<String>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    scenario: &'a str,
    complete: bool,
    expectations_met: bool,
    error: Option<&'a str>,
    stamp: &'a Stamp,
    tables: Vec<&'a str>,
    checks: &'a [Check],
}

impl Report {
    pub fn new(scenario: &str, stamp: Stamp) -> Self {
        Self { scenario: scenario.into(), stamp, tables: Vec::new(), checks: Vec::new(), error: None }
    }

    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }

    /// True when the scenario ran to completion and every verdict equals its
    /// expectation.
    pub fn expectations_met(&self) -> bool {
        self.is_complete() && self.checks.iter().all(Check::matches)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(ReportJson {
            scenario: &self.scenario,
            complete: self.is_complete(),
            expectations_met: self.expectations_met(),
            error: self.error.as_deref(),
            stamp: &self.stamp,
            tables: self.tables.iter().map(|t| t.name.as_str()).collect(),
            checks: &self.checks,
        })
        .expect("report serializes")
    }
}

/// Writes `report.json` and `<table>.csv` for every table into `dir`.
/// Output bytes depend only on the report.
pub fn emit_report(report: &Report, dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let json_path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
    text.push('\n');
    std::fs::write(&json_path, text).map_err(io_err(&json_path))?;
    written.push(json_path);
    for table in &report.tables {
        let path = dir.join(format!("{}.csv", table.name));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush().map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
