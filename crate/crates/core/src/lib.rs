//! Simulation library for federated stochastic variational inequalities.
//!
//! The crate is organised around five layers:
//!
//! * [`vi_core`]: monotone operators, stochastic oracles, the synthetic
//!   problem zoo and empirical property checks.
//! * [`prox_mirror`]: composite regularizers, their proximal maps and the
//!   Euclidean mirror map used by local dual averaging.
//! * [`fed_algos`]: LESGD, LIPPAX, SLIPPAX, LSGD, local dual averaging and
//!   heterogeneous LESGD over a simulated federation, plus step-size schedules.
//! * [`gap_metrics`]: restricted and composite gap evaluators, exact
//!   proximal points, drift statistics and extra-gradient co-coercivity checks.
//! * [`bench_harness`]: JSON experiment configs, sweeps, CSV output,
//!   power-law rate fits and exact-reduction comparisons.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench_harness;
pub mod error;
pub mod fed_algos;
pub mod gap_metrics;
pub mod linalg;
pub mod prox_mirror;
pub mod vi_core;

pub use error::{Error, Result};

/// Dense column vector used for every point and operator value.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used by affine operators.
pub type Matrix = nalgebra::DMatrix<f64>;
