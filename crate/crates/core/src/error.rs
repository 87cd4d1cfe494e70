use thiserror::Error;

use crate::solver::TracePoint;

/// Errors produced by the discretization, energy, solver and optimality code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("coordinate {value} outside of {what}")]
    Domain { value: f64, what: &'static str },

    #[error("invalid nodal function: {0}")]
    InvalidFunction(String),

    #[error("non-finite energy density at x = {x}, X = {other}")]
    NonFiniteEnergy { x: f64, other: f64 },

    #[error("singular evaluation at x = X = {0}")]
    Singular(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("line search failed at iteration {iteration} (step underflow)")]
    LineSearch {
        iteration: usize,
        trace: Vec<TracePoint>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
