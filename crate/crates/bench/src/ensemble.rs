use cspsa_core::{run, Method, OptimizerConfig, ProblemSpec, RunStatus, RunTrace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{calibrate_for_problem, Calibration};
use crate::error::{Error, Result};
use crate::statistics::{iteration_statistics, IterationStatistics};

/// A problem, an optimizer and a number of independent seeded runs.
///
/// Run `r` uses seed `base_seed + r` for both the problem instance and the
/// optimizer, so any single run can be reproduced in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub problem: ProblemSpec,
    pub optimizer: OptimizerConfig,
    pub runs: usize,
    pub base_seed: u64,
    /// Replace the step gain by a calibrated one before running.
    pub calibration: Option<Calibration>,
    /// Worker threads; `None` uses all available cores. Results do not
    /// depend on this value.
    pub threads: Option<usize>,
}

impl EnsembleSpec {
    pub fn new(problem: ProblemSpec, optimizer: OptimizerConfig, runs: usize, base_seed: u64) -> Self {
        Self { problem, optimizer, runs, base_seed, calibration: None, threads: None }
    }

    pub fn with_calibration(mut self, calibration: Calibration) -> Self {
        self.calibration = Some(calibration);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

/// Outcome of one run of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub seed: u64,
    /// `Err` holds the message of a run that could not start or finish.
    pub trace: std::result::Result<RunTrace, String>,
}

impl RunOutcome {
    pub fn is_completed(&self) -> bool {
        matches!(&self.trace, Ok(t) if t.status == RunStatus::Completed)
    }
}

/// Statistics over the completed runs, plus every raw outcome in seed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    /// The optimizer actually run, after calibration.
    pub optimizer: OptimizerConfig,
    pub calibrated_gain: Option<f64>,
    pub statistics: Vec<IterationStatistics>,
    pub runs: Vec<RunOutcome>,
    /// Runs left out of the statistics because they diverged or failed.
    pub excluded: usize,
}

impl EnsembleResult {
    /// Recorded values of all completed runs at iteration `k` (1-indexed).
    pub fn values_at(&self, k: u64) -> Vec<f64> {
        self.completed().filter_map(|t| t.records.iter().find(|r| r.k == k).map(|r| r.value)).collect()
    }

    pub fn completed(&self) -> impl Iterator<Item = &RunTrace> {
        self.runs.iter().filter(|r| r.is_completed()).filter_map(|r| r.trace.as_ref().ok())
    }
}

/// Runs every member of the ensemble and aggregates statistics.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleResult> {
    if spec.runs == 0 {
        return Err(Error::Core(cspsa_core::Error::Config("an ensemble needs at least one run".into())));
    }
    spec.optimizer.validate()?;
    spec.problem.validate()?;

    let mut optimizer = spec.optimizer.clone();
    let calibrated_gain = match &spec.calibration {
        Some(cal) => {
            let a = calibrate_for_problem(&spec.problem, optimizer.field, &optimizer.gains, cal, spec.base_seed)?;
            optimizer.gains.a = a;
            if optimizer.method != Method::FirstOrder {
                optimizer.gains.a_bar = a;
            }
            Some(a)
        }
        None => None,
    };

    let one = |r: usize| -> RunOutcome {
        let seed = spec.base_seed.wrapping_add(r as u64);
        let config = optimizer.clone().with_seed(seed);
        let trace = spec
            .problem
            .instantiate(seed, config.field)
            .and_then(|mut inst| run(&mut inst.oracle, &config, &inst.z0))
            .map_err(|e| e.to_string());
        RunOutcome { seed, trace }
    };

    let runs: Vec<RunOutcome> = match spec.threads {
        Some(1) => (0..spec.runs).map(one).collect(),
        threads => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::ThreadPool(e.to_string()))?;
            pool.install(|| (0..spec.runs).into_par_iter().map(one).collect())
        }
    };

    let completed: Vec<&RunTrace> =
        runs.iter().filter(|r| r.is_completed()).filter_map(|r| r.trace.as_ref().ok()).collect();
    let excluded = runs.len() - completed.len();
    let statistics = if completed.is_empty() { Vec::new() } else { iteration_statistics(&completed)? };
    Ok(EnsembleResult { optimizer, calibrated_gain, statistics, runs, excluded })
}
