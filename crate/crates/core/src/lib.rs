//! Modified truncated Milstein (MTM) integration of Itô SDEs with
//! commutative noise and super-linearly growing coefficients, plus the
//! strong-convergence and moment-stability harnesses around it.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brownian;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod integrators;
pub mod registry;
pub mod sampling;
pub mod system;
pub mod truncation;

pub use error::{Error, Result};
pub use integrators::{simulate, Scheme, Trajectory};
pub use system::{DiffusionMatrix, SdeSystem};
pub use truncation::TruncationPolicy;
