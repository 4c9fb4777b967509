use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use finslerlab::DerivativeMode;
use finslerlab_cli::{run, summary_lines, Command, ConfigError, Overrides, Scenario, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Derivatives {
    Exact,
    Fd,
}

/// Conic Finsler geometry checks driven by JSON scenarios.
#[derive(Debug, Parser)]
#[command(name = "finslerlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario file; optional for reproduce-paper.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    derivatives: Option<Derivatives>,
    /// reproduce-paper only: run the helicoid criteria on the sign-flipped profile.
    #[arg(long)]
    corrupted_phi: bool,
}

fn execute(cli: &Cli) -> Result<bool, ConfigError> {
    let start = Instant::now();
    let scenario = match (&cli.scenario, cli.command) {
        (Some(path), _) => Scenario::load(path)?,
        (None, Command::ReproducePaper) => Scenario::default(),
        (None, _) => return Err(ConfigError(format!("{} needs --scenario", cli.command.name()))),
    };
    let mut scenario = scenario.apply(&Overrides {
        tolerance: cli.tol,
        seed: cli.seed,
        derivatives: cli.derivatives.map(|d| match d {
            Derivatives::Exact => DerivativeMode::Exact,
            Derivatives::Fd => DerivativeMode::Fd,
        }),
    })?;
    if cli.corrupted_phi {
        scenario.suite.get_or_insert_with(Default::default).corrupted_phi = true;
    }
    let mut report = run(cli.command, &scenario)?;
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    let json = report.to_json();
    match &cli.out {
        Some(path) => std::fs::write(path, json)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{json}"),
    }
    for line in summary_lines(&report) {
        eprintln!("{line}");
    }
    eprintln!(
        "{}: {} in {:.2}s",
        cli.command.name(),
        if report.passed { "PASS" } else { "FAIL" },
        report.wall_clock_seconds
    );
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("finslerlab: configuration error: {e}");
            EXIT_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
