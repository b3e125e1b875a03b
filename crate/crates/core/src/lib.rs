//! Truncated-Fock numerics for a two-level atom coupled to one cavity mode,
//! with and without the quadratic `(a + a†)²` self-interaction.
//!
//! Operators are dense complex matrices (faer). The photon space is cut off
//! at `|n_max⟩` and every identity that truncation spoils is compared on a
//! low-index block.

pub mod adiabatic;
pub mod dump;
pub mod error;
pub mod expm;
pub mod fock;
pub mod models;
pub mod renormalization;
pub mod spectra;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = faer::c64;
