//! Simulated synchronous network of players sharing a quantum state, with
//! verifiable quantum secret sharing and multiparty quantum computation on
//! top.

pub mod adversary;
pub mod circuit;
pub mod error;
pub mod mpqc;
pub mod net;
pub mod vqss;

pub use error::{Error, Result};
pub use net::{NetworkConfig, Network, PlayerId, Regime, Transcript};
