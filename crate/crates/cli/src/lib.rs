//! Scenario runner for the fracheat library: configuration, dispatch and
//! report/plot-data emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod report;
pub mod scenarios;

use std::path::PathBuf;

pub use config::{
    parse_config, parse_config_str, Overrides, ProblemSpec, Scenario, ScenarioConfig,
};
pub use output::{config_hash, emit_plot_data, execute, write_report};
pub use report::{CheckRecord, RunReport, Series};
pub use scenarios::run_scenario;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io { .. } => 3,
        }
    }
}

/// Cap the global worker pool at FRACHEAT_THREADS when set.
pub fn configure_threads() -> Result<Option<usize>, HarnessError> {
    let Ok(raw) = std::env::var("FRACHEAT_THREADS") else {
        return Ok(None);
    };
    let k: usize = raw.trim().parse().ok().filter(|&k| k > 0).ok_or_else(|| {
        HarnessError::Config(format!(
            "FRACHEAT_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    // a second initialization keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global();
    Ok(Some(k))
}
