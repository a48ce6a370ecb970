use thiserror::Error;

/// Errors shared across the simulation and analysis modules.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix row has 1-norm at or below the row tolerance. For opinion
    /// matrices this means the agent has left the model's domain; for
    /// appraisal matrices it is the vanishing-appraisals failure surface.
    #[error("row {row} has 1-norm <= tolerance (effectively zero)")]
    ZeroRow { row: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The matrix is not of the rank-one signed form `[a_1 rho, ..., a_m rho]`.
    #[error("not an equilibrium: column {column} is not aligned with the faction vector")]
    NotAnEquilibrium { column: usize },

    /// Columns align but the map does not fix the point at tolerance.
    #[error("not an equilibrium: step residual {residual} exceeds tolerance")]
    ResidualTooLarge { residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
