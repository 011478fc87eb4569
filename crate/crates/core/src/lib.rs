//! Unit root tests built on the activation knots of adaptive-Lasso and LARS
//! paths through the ADF regression, together with the classical
//! comparators, data generators and a Monte Carlo harness.

// Argument checks are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adf;
pub mod classical;
pub mod detrend;
pub mod dgp;
pub mod error;
pub mod knot_tests;
pub mod lag_select;
pub mod lars;
pub mod linalg;
pub mod mc;
pub mod rng;
pub mod spacing;
pub mod stats;
pub mod weights;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
