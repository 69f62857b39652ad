use std::path::Path;

use nvreg_core::Error as CoreError;

/// Anything a subcommand can fail with. [`CliError::exit_code`] is the contract with
/// callers: 2 for bad configuration or input, 3 for runtime failures such as a
/// labeling breakdown, 4 when a fit does not converge.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn format(path: &Path, msg: impl Into<String>) -> Self {
        CliError::Format {
            path: path.display().to_string(),
            message: msg.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Format { .. } | CliError::Io { .. } => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::AtSweepPoint { source, .. } => match core_exit_code(source) {
            2 => 3,
            code => code,
        },
        CoreError::NoConvergence { .. } => 4,
        CoreError::Labeling { .. }
        | CoreError::DegenerateLevels { .. }
        | CoreError::NotHermitian { .. }
        | CoreError::FlatCorrelation
        | CoreError::MissingRandomSource => 3,
        _ => 2,
    }
}
