//! Library side of the `equisym` binary: experiment suites, configuration
//! resolution, and report emission, kept callable so integration tests can
//! drive suites without spawning processes.

pub mod config;
pub mod experiments;
pub mod pool;
pub mod report;

pub use config::{resolve, ExperimentConfig, PartialConfig, EXPERIMENTS};
pub use experiments::run_experiment;
pub use report::Report;
