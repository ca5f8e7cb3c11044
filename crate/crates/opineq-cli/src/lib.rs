//! Campaign layer on top of the `opineq` checkers: configuration parsing and
//! merging, seeded instance scheduling, summary statistics, and the report
//! formats written by the `opineq` binary.
//!
//! Everything here is deterministic given the configuration: per-instance
//! seeds are derived from `(campaign seed, theorem ordinal, instance index)`,
//! so reports are byte-identical across runs and execution order.

pub mod campaign;
pub mod config;
pub mod report;

/// Errors surfaced to the CLI. `Config` maps to exit code 2, everything that
/// reaches a verdict maps to 0/1 via the report.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Check(#[from] opineq::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
