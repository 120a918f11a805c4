//! Explicit tree codes.
//!
//! * [`pascal`] and [`linearcode`]: MDS tree codes over the integers generated
//!   by totally-non-singular triangular matrices, instantiated with Pascal's
//!   matrix.
//! * [`packing`], [`ecc`], [`lagged`], [`pipeline`]: a binary-input tree code
//!   with distance 1/16 whose per-position alphabet grows polylogarithmically.
//! * [`verify`]: exhaustive and sampled distance oracles.

pub mod cli;
pub mod ecc;
pub mod error;
pub mod lagged;
pub mod linearcode;
pub mod packing;
pub mod pascal;
pub mod pipeline;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
pub use symbol::{BitString, Nat, StreamEncoder, Symbol};
