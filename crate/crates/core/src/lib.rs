//! Deterministic higher-order chirp probing sequences, Toeplitz sensing
//! matrices built from them, and certificates for their restricted isometry
//! property.
//!
//! The number-theoretic layer (`qirr`, `cfrac`) is exact: quadratic
//! irrationals, continued fractions, Ostrowski numeration. The signal layer
//! (`sequences`, `acf`, `sensing`) works in double precision on top of
//! certified chirp phases.

pub mod error;
pub mod acf;
pub mod cfrac;
pub mod cli;
pub mod qirr;
pub mod sensing;
pub mod sequences;

pub use error::{Error, Result};
