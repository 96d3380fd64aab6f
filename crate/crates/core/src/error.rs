use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("composite dimension {dim} exceeds the configured maximum {max}")]
    ModelTooLarge { dim: usize, max: usize },

    #[error("contract violation: {what} (residual {residual:e})")]
    ContractViolation { what: String, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {what} (residual {residual:e})")]
    ModelInvalid { what: String, residual: f64 },

    #[error("numerical contamination: {what} (residual {residual:e})")]
    NumericalContamination { what: String, residual: f64 },

    #[error("premise violated: {what} (residual {residual:e})")]
    Premise { what: String, residual: f64 },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
