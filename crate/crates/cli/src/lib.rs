//! Scenario-driven experiment runner.

pub mod report;
pub mod run;
pub mod scenario;
pub mod selftest;

pub use report::RunReport;
pub use run::run_scenario;
pub use scenario::{parse_scenario, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("scenario field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Protocol(#[from] qss_protocol::error::Error),
    #[error(transparent)]
    Core(#[from] qss_core::error::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
