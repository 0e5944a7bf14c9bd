//! Federated algorithms over a simulated federation of `M` clients that take
//! `K` local steps between averaging rounds.
//!
//! Every client query draws from a counter-based stream addressed by
//! `(client, step, inner, counter)`, so runs are bit-reproducible under any
//! worker count, and methods that coincide mathematically (LDA without a
//! regularizer and LESGD, for example) coincide bit for bit.

mod config;
mod engine;
mod hetero;
mod inner;
pub mod step_size;

use std::sync::Arc;

pub use config::RunConfig;
pub use engine::{simulate, Method, Observer, RoundRecord, StepView, Trajectory};
pub use hetero::{estimate_heterogeneity, mean_operator, HETEROGENEITY_SAMPLES};
pub use inner::{inner_prox_path, solve_inner_prox};
pub use step_size::{
    step_size, step_size_with, DeltaRule, ProblemConstants, Shape, StepSizeOptions, StepSizePlan, TheoremId,
};

use crate::error::Result;
use crate::prox_mirror::RegularizerSpec;
use crate::vi_core::{OperatorSpec, OracleSpec};

/// Local extra-gradient SGD.
pub fn run_lesgd(oracle: &OracleSpec, cfg: &RunConfig) -> Result<Trajectory> {
    simulate(std::slice::from_ref(oracle), Method::Lesgd, cfg, None)
}

/// Local inexact proximal point with an extra-gradient outer step.
pub fn run_lippax(oracle: &OracleSpec, cfg: &RunConfig) -> Result<Trajectory> {
    simulate(std::slice::from_ref(oracle), Method::Lippax, cfg, None)
}

/// LIPPAX whose inner queries are perturbed by `δ·s`, `s ~ N(0, I)`.
pub fn run_slippax(oracle: &OracleSpec, cfg: &RunConfig) -> Result<Trajectory> {
    simulate(std::slice::from_ref(oracle), Method::Slippax, cfg, None)
}

/// Local SGD on the operator.
pub fn run_lsgd(oracle: &OracleSpec, cfg: &RunConfig) -> Result<Trajectory> {
    simulate(std::slice::from_ref(oracle), Method::Lsgd, cfg, None)
}

/// Local dual averaging for composite problems with regularizer `reg`.
pub fn run_lda(oracle: &OracleSpec, reg: &RegularizerSpec, cfg: &RunConfig) -> Result<Trajectory> {
    simulate(std::slice::from_ref(oracle), Method::Lda(reg), cfg, None)
}

/// LESGD where client `m` queries its own oracle `oracles[m]`.
pub fn run_lesgd_hetero(oracles: &[OracleSpec], cfg: &RunConfig) -> Result<Trajectory> {
    if oracles.len() != cfg.clients {
        return Err(crate::Error::param(
            "oracles",
            format!("expected {} client oracles, got {}", cfg.clients, oracles.len()),
        ));
    }
    simulate(oracles, Method::Lesgd, cfg, None)
}

/// Mean operator of the clients' oracles.
pub fn hetero_mean(oracles: &[OracleSpec]) -> Result<OperatorSpec> {
    let ops: Vec<Arc<OperatorSpec>> = oracles.iter().map(|o| o.base.clone()).collect();
    mean_operator(&ops)
}
