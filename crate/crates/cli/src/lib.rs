//! Command-line experiments: configuration layering (file, then flags),
//! ensemble execution and CSV/JSON export.

pub mod config;
pub mod error;
pub mod execute;

pub use config::{parse_env_seed, Application, Experiment, ExperimentConfig, GainsSpec, OutputFormat, SEED_ENV};
pub use error::{Error, Result};
pub use execute::{execute, Report, Summary, SCHEMA_VERSION, STATISTICS_FILE, SUMMARY_FILE};
