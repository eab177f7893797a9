//! Qudit stabilizer simulation of measurement-induced entanglement transitions
//! on the one-dimensional boundary of two-dimensional shallow circuits.

pub mod error;
pub mod gf;
pub mod pauli;

pub use error::{Error, Result};
pub mod oracle;
pub mod experiments;
pub mod graph;
pub mod lattice;
pub mod rng;
pub mod statmech;
