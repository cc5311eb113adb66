use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("energy window cannot be bounded: {0}")]
    UnboundedWindow(String),
    #[error("series error: {0}")]
    Series(String),
    #[error("missing data: {0}")]
    Missing(String),
    #[error("inconsistent interpolation: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
