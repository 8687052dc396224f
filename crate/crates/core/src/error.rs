use thiserror::Error;

/// Errors raised by the model, the solver and the diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("non-finite value in {field} at cell {cell} (t = {t:?})")]
    NonFinite {
        field: &'static str,
        cell: usize,
        t: f64,
    },

    #[error("nothing to evolve: every cell is vacuum")]
    AllVacuum,

    #[error(
        "negative-density clip of {clipped:e} exceeds budget {budget:e} at t = {t:?} \
         (worst cell {cell}, rho = {rho:e})"
    )]
    ClipBudgetExceeded {
        clipped: f64,
        budget: f64,
        t: f64,
        cell: usize,
        rho: f64,
    },

    #[error("quadrature did not converge for {0}")]
    QuadratureDiverged(String),

    #[error("certificate undefined: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
