//! Exact desk-scale building blocks for verifiable quantum secret sharing:
//! prime-field Reed-Solomon codes, qupit simulators, and the quantum
//! Reed-Solomon CSS code layer.

pub mod css;
pub mod error;
pub mod field;
pub mod gate;
pub mod linalg;
pub mod pauli;
pub mod poly;
pub mod rs;
pub mod sim;

pub use error::{Error, Result};
pub use field::{Fe, PrimeField};
