//! Quantum Fisher information for fermionic Gaussian states, computed
//! from 2n×2n correlation matrices and cross-checked against a dense
//! Fock-space oracle at small mode counts.

pub mod checks;
pub mod error;
pub mod gaussian;
pub mod models;
pub mod oracle;
pub mod skewlin;
pub mod sld;
pub mod tolerances;

pub use error::{Error, Result};
