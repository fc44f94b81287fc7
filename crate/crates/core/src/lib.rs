//! Nested sampling with power-posterior repartitioning of the prior.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod models;
pub mod output;
pub mod priors;
pub mod quadrature;
pub mod repartition;
pub mod sampler;
pub mod special;

pub use error::{Error, Result};
pub use models::{GaussianMeasurementModel, LogLikelihood};
pub use priors::{PriorConfig, PriorSpec};
pub use repartition::{InferenceProblem, Mode};
pub use sampler::{run, RunResult, SamplerConfig, Termination};
