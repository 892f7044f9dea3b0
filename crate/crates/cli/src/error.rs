use std::path::PathBuf;

use framelab::FrameError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    ConfigParse(String),

    #[error("unknown gallery id `{0}`")]
    UnknownGalleryId(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(FrameError),
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::UnknownGalleryId(id) => Self::UnknownGalleryId(id),
            FrameError::ParamValidation(msg) => Self::ConfigParse(msg),
            FrameError::UnknownKind(kind) => Self::ConfigParse(format!("unknown generator kind `{kind}`")),
            other => Self::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ConfigParse(_) | Self::UnknownGalleryId(_) | Self::Io { .. } => crate::EXIT_CONFIG,
            Self::Numerical(_) => crate::EXIT_NUMERICAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
