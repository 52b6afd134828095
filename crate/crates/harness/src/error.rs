use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical divergence: {0}")]
    Divergence(consensus_lab::Error),

    #[error(transparent)]
    Numerical(consensus_lab::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    /// 0 is success; 2 config error; 3 divergence; 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Divergence(_) => 3,
            Self::Numerical(_) | Self::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

impl From<consensus_lab::Error> for HarnessError {
    fn from(e: consensus_lab::Error) -> Self {
        match e {
            consensus_lab::Error::Diverged { .. } => Self::Divergence(e),
            consensus_lab::Error::InvalidArgument(_) | consensus_lab::Error::Parse { .. } => {
                Self::Config(e.to_string())
            }
            other => Self::Numerical(other),
        }
    }
}

/// Errors raised while turning config values into models.
pub(crate) fn config_err(e: consensus_lab::Error) -> HarnessError {
    HarnessError::Config(e.to_string())
}
