use alloc::boxed::Box;
use alloc::string::String;

use thiserror::Error;

use crate::smo::TrainDiagnostics;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "solver did not converge after {} iterations (max KKT violation {})",
        .0.iterations,
        .0.max_kkt_violation
    )]
    Convergence(Box<TrainDiagnostics>),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("missing value for field `{0}`")]
    MissingValue(String),
}
