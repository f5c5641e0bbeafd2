//! Ensemble experiments for `cspsa-core`: gain calibration, many seeded
//! runs, and per-iteration statistics (mean, standard deviation, median,
//! quartiles) with CSV export.

mod calibration;
mod ensemble;
mod error;
mod output;
mod statistics;

pub use calibration::{calibrate_first_order_gain, calibrate_for_problem, Calibration};
pub use ensemble::{run_ensemble, EnsembleResult, EnsembleSpec, RunOutcome};
pub use error::{Error, Result};
pub use output::{format_float, read_statistics_csv, write_statistics_csv, CSV_HEADER};
pub use statistics::{iteration_statistics, quantile, sample_std, summarize_final, IterationStatistics, SummaryRow};
