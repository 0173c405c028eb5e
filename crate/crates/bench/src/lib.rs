//! Experiment driver: solver comparisons, noise sweeps and circuit error
//! estimates over TSPLIB or random instances, written as CSV, JSON and SVG.

pub mod commands;
pub mod config;
pub mod plot;
pub mod records;
pub mod run;
pub mod stats;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("instance error: {0}")]
    Instance(String),
    #[error("solver error: {0}")]
    Solve(String),
    #[error("malformed results: {0}")]
    Format(String),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub use config::{InstanceSource, RunConfig, SolverKind};
pub use records::RunRecord;
