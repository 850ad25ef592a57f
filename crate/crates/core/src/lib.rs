//! Reduction invariants of K3 surfaces with complex multiplication.

pub mod arith;
pub mod cli;
pub mod error;
pub mod fields;
pub mod frobenius;
pub mod kummer;
pub mod lattice;
pub mod predictor;
pub mod selftest;
pub mod sweep;
pub mod witt;

pub use error::{Error, Result};
