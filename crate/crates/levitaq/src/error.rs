use std::path::PathBuf;

use levitaq_core::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read config file {}: {source}", path.display())]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    ConfigSyntax { path: PathBuf, line: usize, msg: String },
    #[error("unknown key `{key}` for {command} ({origin})")]
    UnknownKey { key: String, command: &'static str, origin: String },
    #[error("invalid value `{value}` for `{key}`: {msg}")]
    BadValue { key: String, value: String, msg: String },
    #[error("{}: {msg}", path.display())]
    Input { path: PathBuf, msg: String },
    #[error("writing {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
    #[error("{op}: {source}")]
    Core { op: &'static str, source: levitaq_core::Error },
    #[error("{0}")]
    Physics(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    /// 1 for configuration and input problems, 2 for physics-domain
    /// failures, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } => match source.kind() {
                ErrorKind::InvalidInput => 1,
                ErrorKind::Physics => 2,
                ErrorKind::Solver => 3,
            },
            CliError::Physics(_) => 2,
            CliError::Solver(_) => 3,
            _ => 1,
        }
    }
}

/// Attaches the failing operation's name to core errors.
pub trait CoreContext<T> {
    fn during(self, op: &'static str) -> Result<T, CliError>;
}

impl<T> CoreContext<T> for levitaq_core::Result<T> {
    fn during(self, op: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { op, source })
    }
}
