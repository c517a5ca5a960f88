//! Simulation and verification of mixed-state polarization transport on
//! spin networks.

pub mod collapse;
pub mod conditions;
pub mod error;
pub mod fermion;
pub mod hilbert;
pub mod network;
pub mod pauli;
pub mod trace;
pub mod walk;

pub use error::{Error, Result};
