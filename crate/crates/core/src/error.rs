use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible geometry: {0}")]
    Geometry(String),

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("assembly: {0}")]
    Assembly(String),

    #[error("factorization breakdown: {0}")]
    Factorization(String),

    #[error("eigensolver: {0}")]
    Eigen(String),

    #[error(
        "truncation certificate failed: first eigenvalue {first:.6} of mode {mode} does not exceed \
         merged value {merged:.6}; increase the highest azimuthal mode"
    )]
    Truncation { mode: usize, first: f64, merged: f64 },

    #[error("extrapolation: {0}")]
    Extrapolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
