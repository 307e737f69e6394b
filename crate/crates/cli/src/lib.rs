//! Experiment driver: JSON configs in, JSON/CSV results and a manifest out.

pub mod config;
pub mod run;
pub mod selftest;

pub use config::{Experiment, ExperimentConfig};
pub use run::{run, run_path, RunOutcome};

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "AUTOBRAID_THREADS";
