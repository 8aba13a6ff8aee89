//! Exact Ruban p-adic continued fractions.

pub mod classify;
pub mod cli;
pub mod error;
pub mod expansion;
pub mod fraction;
pub mod heights;
pub mod padic;
pub mod transcendence;

pub use error::{Result, RubanError};
