use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("degenerate grid: q_max == q_min leaves a single inventory state (explicit override required)")]
    DegenerateGrid,

    #[error("structural error: {0}")]
    Structural(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("Perron vector has a non-positive entry at index {index} ({value:e})")]
    NonPositivePerron { index: usize, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rate matrix is not irreducible: zero {direction} rate at inventory {inventory}")]
    Reducible {
        inventory: i32,
        direction: &'static str,
    },

    #[error("root finder did not converge within {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("policy error: {0}")]
    Policy(String),

    #[error("observation out of order: time {time} precedes retained time {last}")]
    Ordering { time: f64, last: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate design matrix for model `{0}`")]
    DegenerateDesign(&'static str),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures that come from numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eigen(_)
                | Error::NonPositivePerron { .. }
                | Error::Convergence { .. }
                | Error::Reducible { .. }
                | Error::DegenerateDesign(_)
        )
    }
}
