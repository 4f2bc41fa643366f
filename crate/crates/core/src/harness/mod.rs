//! Experiment configurations, seed-replicated runs and CSV output.

pub mod config;
pub mod examples;
pub mod run;
pub mod tables;

pub use config::{ExperimentConfig, Rcond};
pub use run::{run, run_to_dir, ResultRow, RunOptions};
pub use tables::{table_spec, table_to_dir};
