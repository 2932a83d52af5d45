use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown key `{key}`{}{}", line.map(|l| format!(" at line {l}")).unwrap_or_default(), suggestion.as_ref().map(|s| format!("; did you mean `{s}`?")).unwrap_or_default())]
    UnknownKey { key: String, line: Option<usize>, suggestion: Option<String> },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] qsteer::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::UnknownKey { .. } | CliError::Validation(_) => 2,
            CliError::Core(qsteer::Error::InvalidParameter(_)) => 2,
            CliError::Core(_) | CliError::Io(_) => 3,
        }
    }
}
