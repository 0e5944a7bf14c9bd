//! Operators, stochastic oracles, deterministic random streams and the
//! synthetic problem zoo.

pub mod matrix_io;
pub mod operator;
pub mod oracle;
pub mod properties;
pub mod rng;
pub mod zoo;

pub use operator::{
    affine_cocoercivity, eval_operator, regularize, Constants, OperatorKind, OperatorSpec, ProblemKind,
};
pub use oracle::{sample_oracle, NoiseModel, OracleSpec};
pub use properties::{verify_properties, PropertyReport};
pub use rng::{DrawPath, RngStream};
pub use zoo::{make_test_problem, ProblemParams};
