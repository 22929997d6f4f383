//! Experiment runner around the `wasn_deploy` optimizers: config loading,
//! batch runs, sweep aggregation and deployment export.

pub mod config;
pub mod export;
pub mod run;
pub mod state;
pub mod sweep;

pub use config::{Algorithm, ExperimentConfig, OUTPUT_DIR_ENV};
pub use run::{run, RunOptions, RunReport};
pub use state::FinalState;
