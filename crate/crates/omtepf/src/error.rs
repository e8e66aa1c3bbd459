//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Vector/matrix dimensions do not line up with the declared net sizes.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A firing would drive a marking negative (or a binary marking out of
    /// {0,1}) beyond tolerance.
    #[error("infeasible firing: {0}")]
    InfeasibleFiring(String),

    /// A battery state of charge left its [0, capacity] interval.
    #[error("state-of-charge bound violated: {0}")]
    SocBound(String),

    /// Model/configuration inputs are inconsistent with the fixed topology or
    /// with each other.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two boundary pins disagree about the value of one variable.
    #[error("conflicting boundary pins: {0}")]
    BoundaryConflict(String),

    /// A constraint row references a variable that was never indexed.
    #[error("structural error: {0}")]
    Structure(String),

    /// An objective term that must be convex is not.
    #[error("convexity error: {0}")]
    Convexity(String),

    /// The charging heuristic could not apply a rewrite without violating a
    /// capacity.
    #[error("heuristic conflict: {0}")]
    HeuristicConflict(String),

    /// A solver reported the problem infeasible.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A solver reported the problem unbounded.
    #[error("unbounded: {0}")]
    Unbounded(String),

    /// A solver hit its node or wall-clock budget without proving optimality.
    #[error("solver limit reached: {0}")]
    SolverLimit(String),

    /// A solution failed the independent residual/integrality audit.
    #[error("audit failure: {0}")]
    Audit(String),

    /// A model or solution file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Model file carries an unsupported format version.
    #[error("unsupported model version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
