use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration or arguments.
    #[error("usage error: {0}")]
    Usage(String),

    /// A numerical routine failed; `module` names the library module.
    #[error("{module}: {source}")]
    Numerical {
        module: &'static str,
        #[source]
        source: sharpeig_core::Error,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    /// Process exit code: 2 for usage errors, 3 for numerical and I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical { .. } | Self::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches a module name to library errors.
pub trait Context<T> {
    fn in_module(self, module: &'static str) -> Result<T>;
    /// Treats a library error as a rejection of the named config field.
    fn for_field(self, field: &str) -> Result<T>;
}

impl<T> Context<T> for sharpeig_core::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T> {
        self.map_err(|source| CliError::Numerical { module, source })
    }

    fn for_field(self, field: &str) -> Result<T> {
        self.map_err(|e| CliError::Usage(format!("field `{field}`: {e}")))
    }
}
