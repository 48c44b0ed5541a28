//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("heat kernel requires t > 0, got t = {0}")]
    NonpositiveTime(f64),

    #[error("operation requires a bounded set, got {0}")]
    UnboundedSet(String),

    #[error("no closed-form capacity for this set/exponent: {0}")]
    NoClosedForm(String),

    #[error("capacity minimizer stalled after {iters} iterations (last value {last_value})")]
    OptimizerStalled { iters: usize, last_value: f64 },

    #[error("quasi-additivity pieces overlap: {0}")]
    PiecesOverlap(String),

    #[error("green potential needs slices covering [0, t]: {0}")]
    IncompleteHistory(String),

    #[error("pointwise absorption solve failed to converge at node {node} (u* = {ustar})")]
    PointwiseSolveFailed { node: usize, ustar: f64 },

    #[error("discrete maximum principle violated: {0}")]
    MaximumPrincipleViolated(String),

    #[error("no very singular profile in this exponent regime: {0}")]
    NoProfileRegime(String),

    #[error("profile shooting failed: {0}")]
    ShootingFailed(String),

    #[error("closed form disagrees with grid-search oracle by {rel_err:.3e} (limit {limit:.1e})")]
    OracleDisagreement { rel_err: f64, limit: f64 },

    #[error("quadrature failed to converge: requested {requested:.3e}, achieved {achieved:.3e}")]
    QuadratureFailed { requested: f64, achieved: f64 },

    #[error("geometry not representable exactly: {0}")]
    UnsupportedGeometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
