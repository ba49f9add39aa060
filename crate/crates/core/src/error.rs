use thiserror::Error;

/// Errors raised by field evaluation, geometric operators and the tooling
/// built on top of them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("point {point:?} lies outside the chart domain")]
    Domain { point: Vec<f64> },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate {what} at {point:?} (det = {det:e})")]
    Degenerate {
        what: String,
        point: Vec<f64>,
        det: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: missing field `{0}`")]
    MissingField(String),

    #[error("no closed-form recipe for constraints {0}; use synthesize_connection")]
    Redirect(String),

    #[error("generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;

impl GeomError {
    pub fn shape(msg: impl Into<String>) -> Self {
        GeomError::Shape(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        GeomError::Precondition(msg.into())
    }

    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        GeomError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
