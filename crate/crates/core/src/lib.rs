//! Simulation and gate engineering for tunable-coupling transmon qubits
//! coupled to a microwave resonator.
//!
//! Conventions used throughout: frequencies in GHz, couplings and rates in
//! MHz, times in ns. Stored values are linear frequencies; generators of time
//! evolution are multiplied by 2π where they are assembled.

pub mod dynamics;
pub mod error;
pub mod format;
pub mod gates;
pub mod opcore;
pub mod pulse;
pub mod tcq;

pub use error::{Error, Result};
