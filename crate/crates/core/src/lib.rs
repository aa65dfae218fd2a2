//! Variance-reduced heavy-ball power iteration for the top eigenvector of
//! a sample covariance `C = (1/n) A Aᵀ`, together with baseline solvers,
//! rate analysis and an experiment harness.

// NaN-rejecting checks are written as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod data;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod rate;
pub mod solvers;
pub mod trace;

pub use nalgebra;

pub use error::{Divergence, Error, Result};
pub use matrix::{DataMatrix, MiniBatch, Sampling};
pub use solvers::{Momentum, SolverConfig};
pub use trace::{RunTrace, TraceRow};
