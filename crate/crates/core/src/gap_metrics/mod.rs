//! Restricted and composite gap functionals, client drift, and exact oracles
//! for affine problems.

mod affine;
mod ascent;
mod composite;
mod drift;
mod restricted;

use serde::{Deserialize, Serialize};

use crate::Vector;

pub use affine::{check_eg_cocoercivity, exact_prox_point, EgCocoercivityReport};
pub use composite::{composite_gap, composite_gap_with};
pub use drift::{client_drift, DriftSnapshot};
pub use restricted::{restricted_gap, restricted_gap_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapMethod {
    /// Exact concave maximization for affine operators, multistart ascent otherwise.
    #[default]
    Auto,
    ExactConcave,
    MultistartAscent,
    /// Dense polar grid, only for `d ≤ 2`.
    Grid,
}

impl GapMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            GapMethod::Auto => "auto",
            GapMethod::ExactConcave => "exact-concave",
            GapMethod::MultistartAscent => "multistart-ascent",
            GapMethod::Grid => "grid",
        }
    }
}

/// Tuning knobs for the gap evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOptions {
    pub method: GapMethod,
    /// Multistart count (prefix of: center, projected `x_o`, boundary points).
    pub starts: usize,
    pub ascent_iterations: usize,
    /// Points per polar axis for the grid method (`n × n` points in 2-d).
    pub grid_resolution: usize,
    pub seed: u64,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            method: GapMethod::Auto,
            starts: 16,
            ascent_iterations: 500,
            grid_resolution: 1000,
            seed: 0x6A09_E667_F3BC_C908,
        }
    }
}

impl GapOptions {
    pub fn with_method(method: GapMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapEstimate {
    pub value: f64,
    /// Method actually used (never `Auto`).
    pub method: GapMethod,
    /// True for the exact concave solve and for the grid at its stated
    /// resolution; ascent results are lower bounds.
    pub certified: bool,
    pub maximizer: Vector,
    /// Dual bound minus value, when a dual certificate is available.
    pub duality_gap: Option<f64>,
}
