//! Reproducible experiment runner for the multilook compressed-sensing SAR
//! imaging lab: config-driven pipelines, parameter sweeps, and artifact
//! persistence. The binary front end lives in `main.rs`; this library
//! exposes the pieces for integration testing.

pub mod config;
pub mod error;
pub mod export;
pub mod runner;

pub use config::{ExperimentConfig, Overrides};
pub use error::{CliError, CliResult};
pub use runner::{run_simulate, run_single, run_sweep, RunManifest};
