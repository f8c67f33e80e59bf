use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::report::{RunReport, Series};
use crate::scenarios::run_scenario;
use crate::HarnessError;

/// SHA-256 of the canonical JSON form of the config; the output directory is excluded.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn render_csv(report: &RunReport, series: &Series) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# fracheat scenario={} config_hash={} columns={} | {}",
        report.scenario.name(),
        report.config_hash,
        series.columns.join(","),
        series.description
    )
    .unwrap();
    for row in &series.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    file: &'a str,
    description: &'a str,
    columns: &'a [String],
    rows: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario: &'a str,
    config_hash: &'a str,
    comment: &'static str,
    series: Vec<ManifestEntry<'a>>,
}

/// Write every series as CSV plus `plots.json`; returns the written paths.
pub fn emit_plot_data(report: &RunReport, output_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if report.series.is_empty() {
        eprintln!(
            "warning: report for {} carries no plot data; nothing written",
            report.scenario.name()
        );
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(output_dir).map_err(io_err(output_dir))?;
    let mut written = Vec::with_capacity(report.series.len() + 1);
    for series in &report.series {
        let path = output_dir.join(&series.file);
        std::fs::write(&path, render_csv(report, series)).map_err(io_err(&path))?;
        written.push(path);
    }
    let manifest = Manifest {
        scenario: report.scenario.name(),
        config_hash: &report.config_hash,
        comment: "each CSV has one '#' header line naming its columns; data rows are comma-separated floats",
        series: report
            .series
            .iter()
            .map(|s| ManifestEntry { file: &s.file, description: &s.description, columns: &s.columns, rows: s.rows.len() })
            .collect(),
    };
    let path = output_dir.join("plots.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}

pub fn write_report(report: &RunReport, output_dir: &Path) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(output_dir).map_err(io_err(output_dir))?;
    let path = output_dir.join("report.json");
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(path)
}

/// Run, then write plot data and `report.json` into the configured directory.
pub fn execute(cfg: &ScenarioConfig) -> Result<RunReport, HarnessError> {
    let mut report = run_scenario(cfg);
    let dir = cfg.output_dir.clone();
    let files = emit_plot_data(&report, &dir)?;
    report.artifacts = files
        .iter()
        .map(|p| {
            p.file_name().map_or_else(
                || p.display().to_string(),
                |f| f.to_string_lossy().into_owned(),
            )
        })
        .collect();
    report.artifacts.push("report.json".into());
    write_report(&report, &dir)?;
    Ok(report)
}
