use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Cholesky hit a non-positive pivot; the input is numerically not positive definite.
    #[error("factorization failure at pivot {pivot}: {detail}")]
    FactorizationFailure { pivot: usize, detail: String },

    #[error("singular input: smallest singular value {smallest:e} below floor {floor:e}")]
    SingularInput { smallest: f64, floor: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite integrand value at sample {sample}: {detail}")]
    NonFiniteIntegrand { sample: usize, detail: String },

    #[error("numerical range exceeded: {0}")]
    NumericalRange(String),

    #[error("renormalized product blew up at step {step}: {detail}")]
    NumericalBlowup { step: usize, detail: String },

    #[error("measure spec error at `{field}`: {message}")]
    SpecError { field: String, message: String },
}

impl Error {
    pub(crate) fn spec(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SpecError {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by the caller's input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::SpecError { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
