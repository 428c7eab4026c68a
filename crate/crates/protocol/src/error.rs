use thiserror::Error;

use crate::net::PlayerId;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] qss_core::Error),
    #[error("configuration rejected: {0}")]
    ConfigRejected(String),
    #[error("wire {wire} is not held by {holder}")]
    OwnershipViolation { wire: usize, holder: String },
    #[error("no player {0}")]
    NoSuchPlayer(usize),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("{player} is not allowed to {action}")]
    NotAllowed { player: PlayerId, action: String },
}

pub type Result<T> = std::result::Result<T, Error>;
