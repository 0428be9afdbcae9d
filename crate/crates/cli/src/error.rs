use std::fmt;
use std::path::PathBuf;

/// Where a config value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File {
        path: Option<PathBuf>,
        line: usize,
    },
    Override(String),
    /// A cross-field check on the merged configuration.
    Resolved,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path: Some(p), line } => write!(f, "{}:{line}", p.display()),
            Origin::File { path: None, line } => write!(f, "line {line}"),
            Origin::Override(raw) => write!(f, "override `{raw}`"),
            Origin::Resolved => f.write_str("resolved config"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{origin}: `{field}`: {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(origin: Origin, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            origin,
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(isac_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl From<isac_core::Error> for CliError {
    /// Parameter-validation errors from the library are configuration
    /// mistakes; everything else is numerical.
    fn from(e: isac_core::Error) -> Self {
        match e {
            isac_core::Error::InvalidParameter { field, reason } => {
                CliError::Config(ConfigError::new(Origin::Resolved, field, reason))
            }
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}
