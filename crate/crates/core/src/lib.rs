//! Time-consistent equilibrium investment strategies under Volterra
//! (rough) Heston stochastic volatility.
//!
//! The crate covers the kernel and resolvent toolkit, Volterra and
//! Riccati-Volterra solvers, the equilibrium strategies for the constant and
//! log mean-variance objectives and for log utility with non-exponential
//! discounting, and a Monte-Carlo simulator for the variance and wealth.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod grid;
pub mod kernels;
pub mod montecarlo;
pub mod quadrature;
pub mod strategy;
pub mod volterra;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use kernels::KernelSpec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
