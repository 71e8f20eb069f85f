use std::fmt;
use std::path::PathBuf;

/// Exit status of a failed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Generic = 1,
    Usage = 2,
    Schema = 3,
    Infeasible = 4,
    Cap = 5,
}

#[derive(Debug)]
pub enum CliError {
    Core(stepscript::Error),
    /// Bad configuration or flag combination.
    Usage(String),
    Config { path: PathBuf, message: String },
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use stepscript::Error as E;
        match self {
            CliError::Usage(_) => ExitCode::Usage,
            CliError::Config { .. } | CliError::Io { .. } => ExitCode::Schema,
            CliError::Core(e) => match e {
                E::Schema { .. } | E::Io { .. } | E::UnknownItem(_) | E::EmptyInput(_) => ExitCode::Schema,
                E::Infeasible { .. } | E::TooFewSlots { .. } => ExitCode::Infeasible,
                E::CapExceeded(_) => ExitCode::Cap,
                E::InvalidParameter(_) => ExitCode::Usage,
                E::Inconsistent(_) => ExitCode::Generic,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Config { path, message } => write!(f, "config error in {}: {message}", path.display()),
            CliError::Io { path, source } => write!(f, "i/o error on {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Core(e) => Some(e),
            CliError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<stepscript::Error> for CliError {
    fn from(e: stepscript::Error) -> Self {
        CliError::Core(e)
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
