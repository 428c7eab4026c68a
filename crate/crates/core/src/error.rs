use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("word is beyond the correction radius of the code")]
    DecodeFailure,
    #[error("shares are inconsistent with any low-degree polynomial")]
    InconsistentShares,
    #[error("gate {0} is not supported by this backend")]
    UnsupportedGate(String),
    #[error("sparse state support exceeded cap of {cap} terms")]
    SupportOverflow { cap: usize },
    #[error("dense oracle dimension {dim} exceeds limit {limit}")]
    OracleTooLarge { dim: u128, limit: u128 },
    #[error("wire {0} is not live in this state")]
    NoSuchWire(usize),
    #[error("blocks use incompatible codes: {0}")]
    CodeMismatch(String),
    #[error("result of the operation is not a stabilizer state")]
    NotStabilizer,
}

pub type Result<T> = std::result::Result<T, Error>;
