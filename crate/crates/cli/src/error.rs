use std::process::ExitCode;

/// CLI failures, each mapped to a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration, usage or input data. Exit 2.
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    /// Reading or writing files. Exit 3.
    #[error("I/O error: {0}")]
    Io(String),
    /// The simulation itself failed. Exit 1.
    #[error("run `{run}` failed: {reason}")]
    Run { run: String, reason: String },
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(reason: impl Into<String>) -> Self {
        CliError::Io(reason.into())
    }

    pub fn run(run: impl Into<String>, reason: impl ToString) -> Self {
        CliError::Run {
            run: run.into(),
            reason: reason.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Parse(_) => 2,
            CliError::Io(_) => 3,
            CliError::Run { .. } => 1,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
