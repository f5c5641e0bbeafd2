use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cspsa_bench::{run_ensemble, summarize_final, write_statistics_csv, EnsembleResult, SummaryRow};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const STATISTICS_FILE: &str = "statistics.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Contents of the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub runs: usize,
    pub excluded_runs: usize,
    pub calibrated_a: Option<f64>,
    /// Known minimum of the noiseless objective, when one is available.
    pub exact_minimum: Option<f64>,
    pub wall_time_seconds: f64,
    /// Statistics at the last iteration; absent when every run was excluded.
    pub summary: Option<SummaryRow>,
}

/// What [`execute`] produced.
#[derive(Debug)]
pub struct Report {
    pub result: EnsembleResult,
    pub summary: Summary,
    pub statistics_path: Option<PathBuf>,
    pub summary_path: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

/// Runs the experiment and writes its outputs into `experiment.out`.
pub fn execute(experiment: &Experiment) -> Result<Report> {
    std::fs::create_dir_all(&experiment.out).map_err(|source| Error::Write { path: experiment.out.clone(), source })?;

    let start = Instant::now();
    let result = run_ensemble(&experiment.ensemble)?;
    let wall_time_seconds = start.elapsed().as_secs_f64();

    let k_star = experiment.ensemble.optimizer.max_iterations;
    let summary_row = if result.statistics.is_empty() {
        None
    } else {
        Some(summarize_final(&result.statistics, k_star, &result.optimizer)?)
    };
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        config: experiment.config.clone(),
        seed: experiment.ensemble.base_seed,
        runs: experiment.ensemble.runs,
        excluded_runs: result.excluded,
        calibrated_a: result.calibrated_gain,
        exact_minimum: experiment.ensemble.problem.exact_minimum().ok(),
        wall_time_seconds,
        summary: summary_row,
    };

    let statistics_path = if experiment.format.csv() {
        let path = experiment.out.join(STATISTICS_FILE);
        write_statistics_csv(create(&path)?, &result.statistics)?;
        Some(path)
    } else {
        None
    };
    let summary_path = if experiment.format.json() {
        let path = experiment.out.join(SUMMARY_FILE);
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &summary)?;
        std::io::Write::write_all(&mut w, b"\n").map_err(|source| Error::Write { path: path.clone(), source })?;
        Some(path)
    } else {
        None
    };
    Ok(Report { result, summary, statistics_path, summary_path })
}
