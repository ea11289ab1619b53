use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("function violates the Dirichlet condition: endpoint values {left} and {right}")]
    NotDirichlet { left: f64, right: f64 },

    #[error("grid functions live on different grids (n = {left} vs n = {right})")]
    GridMismatch { left: usize, right: usize },

    #[error("argument integration produced a non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("non-finite value in {0}")]
    NonFiniteValue(&'static str),

    #[error("direction p must be strictly positive on interior nodes (p[{index}] = {value})")]
    NotPositive { index: usize, value: f64 },

    #[error("level {theta} is not attained on the line: W(pi) stays on one side up to |lambda| = {limit}")]
    RangeUnattainable { theta: f64, limit: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("empty scan range: {0}")]
    EmptyScanRange(String),

    #[error("root refinement did not converge: {0}")]
    NoConvergence(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidGrid(_)
                | Error::NotDirichlet { .. }
                | Error::GridMismatch { .. }
                | Error::NotPositive { .. }
                | Error::NotApplicable(_)
                | Error::EmptyScanRange(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
