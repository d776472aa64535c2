use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("budget exceeded: {what} = {requested} is above the cap {cap}")]
    BudgetExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("disorder stream exhausted after {consumed} values without finding the stopping time")]
    NeedsMoreDisorder { consumed: usize },

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed disorder container: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            reason: reason.into(),
        }
    }
}
