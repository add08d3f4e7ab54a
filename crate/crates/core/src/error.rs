use thiserror::Error;

/// Errors produced by model construction and the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A network or model description violates one of its invariants.
    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("invalid size: {0}")]
    Size(String),

    /// Bad argument to an analysis routine.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The imaginary gap closes somewhere in the Brillouin zone.
    #[error("gap closure at k = {k}: winding phase undefined")]
    GapClosure { k: f64 },

    #[error("phase step did not drop below pi/2 with {n_k} k-points")]
    Resolution { n_k: usize },

    /// Parameters sit on a topological phase boundary.
    #[error("parameters on a phase boundary: {0}")]
    PhaseBoundary(String),

    #[error("root finding failed after {iterations} iterations from seed {seed}: residual {residual:e}")]
    RootFinding {
        iterations: usize,
        seed: String,
        residual: f64,
    },

    /// Non-finite intermediate result or a solver that did not converge.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
