use serde::Serialize;

use crate::config::{Scenario, ScenarioConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Passes when value ≤ tolerance.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Passes when value ≥ tolerance.
    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value >= tolerance,
        }
    }

    pub fn with_pass(name: &str, value: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass,
        }
    }
}

/// A plot-ready table written as one CSV file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub file: String,
    pub description: String,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(file: &str, description: &str, columns: &[&str]) -> Self {
        Self {
            file: file.into(),
            description: description.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub config: ScenarioConfig,
    pub config_hash: String,
    pub records: Vec<CheckRecord>,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
    pub error: Option<String>,
    /// Scenario-specific structured output.
    pub details: serde_json::Value,
    pub pass: bool,
    #[serde(skip)]
    pub series: Vec<Series>,
}

impl RunReport {
    /// Recompute `pass` from the records and the error slot.
    pub fn finalize(&mut self) {
        self.pass =
            self.error.is_none() && !self.records.is_empty() && self.records.iter().all(|r| r.pass);
    }

    /// 0 all checks pass, 1 a check failed, 3 a numerical error occurred.
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            3
        } else if self.pass {
            0
        } else {
            1
        }
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}
