//! Error types shared across the crate.
//!
//! Variants are grouped by how a caller is expected to react:
//! configuration/schema problems are user-fixable, capacity and contract
//! violations are programming errors at the call site, and the remaining
//! variants signal numeric failure modes of the pipeline itself.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A size limit was exceeded (qubit count, matrix dimension, ...).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A configuration value or cross-reference is unusable.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Pulse stretching demanded an amplitude beyond the hardware ceiling of 1.
    #[error("amplitude saturation: stretch requires |A| = {required:.6} > 1")]
    AmplitudeSaturation { required: f64 },

    /// The fit design carries no information along one axis.
    #[error("ill-posed fit for pair ({control}, {target}): no variation along the {axis} axis")]
    IllPosedFit {
        control: usize,
        target: usize,
        axis: String,
    },

    /// An optimizer produced a non-finite loss.
    #[error("divergence at iteration {iteration}: last finite loss {last_loss}")]
    Divergence { iteration: usize, last_loss: f64 },

    /// A persisted document did not match its schema.
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    /// No feasible solution exists under the given constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
