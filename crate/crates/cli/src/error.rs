use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Config { path: PathBuf, line: Option<usize>, message: String },

    #[error("{0}")]
    Argument(String),

    #[error(transparent)]
    Library(#[from] rough_equilibrium::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for bad configuration or arguments, 3 for numerical failures, 1
    /// for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Argument(_) => 2,
            CliError::Library(e) if e.is_input_error() => 2,
            CliError::Library(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}
