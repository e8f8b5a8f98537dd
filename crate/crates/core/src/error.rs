use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate census: masses must be nonnegative with at least one positive entry")]
    DegenerateCensus,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("solver diverged: {0}")]
    SolverDiverged(String),

    /// The internalized exposure map is not strictly increasing, so the
    /// modified game may have several equilibria and none is certified as the
    /// global social optimum. Use `social::brute_force_minimizer` instead.
    #[error("vartheta is not strictly increasing on (0, {z_max}]; social optimum is not certified")]
    VarthetaNotMonotone { z_max: f64 },

    #[error("grid search needs {points} points, budget is {budget}")]
    BudgetExceeded { points: u128, budget: u64 },

    #[error("row invariant violated at alpha = {alpha}: {what}")]
    RowInvariant { alpha: f64, what: String },

    #[error("sweep failed at alpha = {alpha}: {source}")]
    Sweep {
        alpha: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for numerical failures, as opposed to bad input.
    pub fn is_solver_error(&self) -> bool {
        match self {
            Error::SolverDiverged(_)
            | Error::VarthetaNotMonotone { .. }
            | Error::BudgetExceeded { .. }
            | Error::RowInvariant { .. } => true,
            Error::Sweep { source, .. } => source.is_solver_error(),
            _ => false,
        }
    }
}
