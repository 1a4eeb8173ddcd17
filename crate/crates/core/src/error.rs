//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coincident points")]
    CoincidentPoints,
    #[error("point ({0}, {1}) is on the boundary")]
    OnBoundary(f64, f64),
    #[error("outside the domain of validity: {0}")]
    OutsideDomain(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("path is not admissible: {0}")]
    PathNotAdmissible(String),
    #[error("escape path hits a corner at step {step}")]
    CornerHit { step: usize },
    #[error("reflection budget of {0} steps exhausted")]
    BudgetExceeded(usize),
    #[error("unstable composition: {0}")]
    Unstable(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("singular linear system (condition estimate {0:.3e})")]
    Singular(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
