//! Simulation lab for character-cycle (CCB) and character-average (CAB) benchmarking,
//! with cross-entropy (XEB) and interleaved character RB (ICRB) baselines.

pub mod channels;
pub mod circuits;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod linalg;
pub mod pauli;
pub mod simulator;

pub use error::{Error, Result};
