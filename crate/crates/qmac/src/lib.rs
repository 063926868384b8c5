//! Entanglement-assisted capacity regions of quantum multiple-access
//! channels: dense quantum-state linear algebra, CPTP channels, entropic
//! functionals, typical subspaces, the rate-region machinery, and a
//! desk-scale simulation of the block-Pauli / square-root-measurement code
//! construction.

pub mod capacity;
pub mod channels;
pub mod cli;
pub mod codesim;
pub mod entropy;
pub mod error;
pub mod qmath;
pub mod typing;

pub use error::{Error, Result};
