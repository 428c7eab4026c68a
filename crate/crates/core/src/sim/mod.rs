//! Qupit state simulators.

pub mod dense;
pub mod sparse;
pub mod state;
pub mod tableau;
