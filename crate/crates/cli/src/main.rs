use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cspsa_cli::{execute, parse_env_seed, ExperimentConfig, Result, SEED_ENV};

/// Run an ensemble of SPSA-family optimizations on a simulated quantum
/// problem and export per-iteration statistics.
///
/// Settings come from `--config` (flat TOML with the same kebab-case keys
/// as the flags) and are overridden by flags. `CSPSA_SEED` supplies the seed
/// when neither sets one.
#[derive(Debug, Parser)]
#[command(name = "cspsa", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    #[command(flatten)]
    experiment: ExperimentConfig,

    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,
}

fn run(cli: Cli) -> Result<()> {
    let base = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let env_seed = parse_env_seed(std::env::var(SEED_ENV).ok().as_deref())?;
    let experiment = base.overlay(cli.experiment).resolve(env_seed)?;
    if cli.dry_run {
        print!("{}", experiment.config.to_toml());
        return Ok(());
    }

    let report = execute(&experiment)?;
    let s = &report.summary;
    match &s.summary {
        Some(row) => eprintln!(
            "{} on {}: median {} iqr {} mean {} std {} ({} of {} runs excluded, {:.1}s)",
            row.method,
            experiment.ensemble.problem.name(),
            row.median,
            row.iqr,
            row.mean,
            row.std,
            s.excluded_runs,
            s.runs,
            s.wall_time_seconds
        ),
        None => eprintln!("all {} runs were excluded", s.runs),
    }
    for path in [&report.statistics_path, &report.summary_path].into_iter().flatten() {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
