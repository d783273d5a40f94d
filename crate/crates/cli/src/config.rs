//! Scenario configuration. A single JSON file; every field has a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io_err, parse_err, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    Ex3,
    Ex5,
    LiftDemo,
    Acceptance,
}

impl ScenarioId {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Ex3 => "ex3",
            ScenarioId::Ex5 => "ex5",
            ScenarioId::LiftDemo => "lift-demo",
            ScenarioId::Acceptance => "acceptance",
        }
    }
}

/// The seed determines every randomized choice of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub p: f64,
    pub n_min: u64,
    /// Upper end of the sequence range; scenario default when absent.
    pub n_max: Option<u64>,
    /// Numeric agreement tolerance.
    pub tol: f64,
    /// Calibration slack of sphere tests.
    pub eps: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioId::LiftDemo,
            p: 2.0,
            n_min: 1,
            n_max: None,
            tol: 1e-9,
            eps: 1e-3,
            seed: 0,
            out: None,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(parse_err(path))
    }

    pub fn n_max_or(&self, default: u64) -> u64 {
        self.n_max.unwrap_or(default)
    }
}
