//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("edge ({i}, {j}) not found")]
    EdgeNotFound { i: usize, j: usize },

    #[error("node {0} out of range")]
    NodeOutOfRange(usize),

    #[error("node {0} is isolated; its unary potential cannot be folded into an edge")]
    IsolatedNode(usize),

    #[error("{what} cap exceeded: {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("LBP did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("stale fixed point: {0}")]
    StaleFixedPoint(String),

    #[error("degenerate belief at node {0}")]
    DegenerateBelief(usize),

    #[error("propagation rules violated ({} checks): first is {}", .violations.len(), .violations[0])]
    PropagationRules { violations: Vec<String> },

    #[error("(beta, gamma) = ({beta}, {gamma}) lies outside the valid belief region")]
    InvalidBetaGammaRegion { beta: f64, gamma: f64 },

    #[error("graph is not regular (node degrees differ)")]
    NotRegular,

    #[error("susceptibility denominator 1 + z - d z vanishes at z = {z}, d = {degree}")]
    SusceptibilitySingular { z: f64, degree: usize },

    #[error("identity check failed: {0}")]
    IdentityCheck(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
}
