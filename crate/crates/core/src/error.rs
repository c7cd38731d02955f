use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative method stopped without meeting its tolerance. `best` is the
    /// best iterate found and `residual` its merit value.
    #[error("{message} (residual {residual:.3e})")]
    Numeric {
        message: String,
        best: Vec<f64>,
        residual: f64,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("field evaluation failed: {0}")]
    Field(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// `"line L column C: message"` for a JSON decoding error, without the
/// location suffix serde_json appends to its own message.
pub fn json_location(e: &serde_json::Error) -> String {
    let text = e.to_string();
    let message = text.rsplit_once(" at line ").map_or(text.as_str(), |(m, _)| m);
    if e.line() == 0 {
        message.to_string()
    } else {
        format!("line {} column {}: {message}", e.line(), e.column())
    }
}
