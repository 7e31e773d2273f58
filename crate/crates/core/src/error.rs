//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step size {delta} outside the admissible window (0, {delta_star}]")]
    DeltaOutOfRange { delta: f64, delta_star: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("{scheme} iterate became non-finite at step {step}")]
    Diverged { scheme: &'static str, step: usize },

    #[error("diffusion of '{label}' is not commutative (bracket gap {gap:e} at {point:?})")]
    NonCommutative {
        label: String,
        gap: f64,
        point: Vec<f64>,
    },

    #[error("all paths diverged at delta = {delta}")]
    AllPathsDiverged { delta: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("unknown system '{0}'")]
    UnknownSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

pub(crate) fn check_index(index: usize, limit: usize) -> Result<()> {
    if index < limit {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, limit })
    }
}
