use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use fracheat_cli::{configure_threads, execute, parse_config, HarnessError, Overrides, Scenario};

#[derive(Parser, Debug)]
#[command(
    name = "fracheat",
    about = "Run a fracheat scenario and write its report and plot data"
)]
struct Cli {
    /// eval, reduce-check, lemma-scaling, solve-ball, moving-planes or liouville
    scenario: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Field registry name for eval.
    #[arg(long)]
    field: Option<String>,
    /// Nonlinearity registry name for ball problems.
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    target_tol: Option<f64>,
    /// Evaluation point as comma-separated x coordinates then t.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let scenario = Scenario::parse(&cli.scenario).ok_or_else(|| {
        HarnessError::Config(format!(
            "unknown scenario '{}'; expected one of {}",
            cli.scenario,
            Scenario::ALL.map(|s| s.name()).join(", ")
        ))
    })?;
    configure_threads()?;
    let ov = Overrides {
        scenario: Some(scenario),
        n: cli.n,
        s: cli.s,
        h: cli.h,
        seed: cli.seed,
        out: cli.out,
        field: cli.field,
        f: cli.f,
        target_tol: cli.target_tol,
        point: cli.point,
    };
    let cfg = parse_config(cli.config.as_deref(), &ov)?;
    let report = execute(&cfg)
        .with_context(|| format!("writing outputs to {}", cfg.output_dir.display()))?;
    for r in &report.records {
        println!(
            "{:<28} {:>14.6e}  tol {:>12.4e}  {}",
            r.name,
            r.value,
            r.tolerance,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    println!(
        "{} {} in {:.2} s; outputs in {}",
        cfg.scenario.name(),
        if report.pass { "passed" } else { "failed" },
        report.wall_time_s,
        cfg.output_dir.display()
    );
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<HarnessError>()
                .map_or(3, HarnessError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
