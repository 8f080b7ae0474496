use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not Hermitian (max asymmetry {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("tetrahedron ordering violated: {0}")]
    Tetrahedron(String),

    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("non-finite integrand {value} at node r={r}, theta1={theta1}, theta2={theta2}")]
    NonFiniteIntegrand {
        value: f64,
        r: f64,
        theta1: f64,
        theta2: f64,
    },

    #[error("invalid quadrature: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
