use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum BwkError {
    /// An index (round, action, resource) fell outside its valid range.
    #[error("{what} {value} out of range (valid: {lo}..={hi})")]
    Range {
        what: &'static str,
        value: usize,
        lo: usize,
        hi: usize,
    },

    /// A numeric input violated its documented domain.
    #[error("validation error: {0}")]
    Validation(String),

    /// An inconsistent configuration was supplied.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl BwkError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        BwkError::Validation(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        BwkError::Config(msg.into())
    }

    /// True for errors caused by bad user input rather than the runtime environment.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            BwkError::Range { .. } | BwkError::Validation(_) | BwkError::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, BwkError>;
