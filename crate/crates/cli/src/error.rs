//! CLI error type; every variant maps to a process exit code.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use flexsim_core::Dataflow;

/// Failures the tool reports. Exit codes: model/usage problems exit 1,
/// verification mismatches exit 2, filesystem errors exit 3.
#[derive(Debug)]
pub enum CliError {
    /// Invalid input or a model-level failure.
    Model(flexsim_core::Error),
    /// Reading or writing a file failed.
    Io { path: PathBuf, source: io::Error },
    /// The cycle-level simulator contradicted the analytical model.
    Verify {
        layer: String,
        dataflow: Dataflow,
        message: String,
    },
    /// Bad invocation that clap could not catch (e.g. missing --topology).
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(_) | CliError::Usage(_) => 1,
            CliError::Verify { .. } => 2,
            CliError::Io { .. } => 3,
        }
    }

    /// Map an I/O error to `CliError::Io` for `path`.
    pub fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Model(err) => write!(f, "{err}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Verify {
                layer,
                dataflow,
                message,
            } => write!(
                f,
                "verification failed for layer {layer:?} under {dataflow}: {message}"
            ),
            CliError::Usage(message) => write!(f, "{message}"),
        }
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CliError::Model(err) => Some(err),
            CliError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<flexsim_core::Error> for CliError {
    fn from(err: flexsim_core::Error) -> Self {
        CliError::Model(err)
    }
}
