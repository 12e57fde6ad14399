//! CLI error with exit-code categories: 2 usage/config, 3 data,
//! 4 numeric/pipeline, 5 I/O.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("verification failed: {0}")]
    Verify(String),

    #[error(transparent)]
    Core(#[from] stresslab_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }

    pub fn category_code(&self) -> u8 {
        use stresslab_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Verify(_) => 3,
            CliError::Io { .. } => 5,
            CliError::Core(core) => match core {
                E::InvalidParameter(_) => 2,
                E::Csv { .. }
                | E::NonIncreasingDates { .. }
                | E::EmptyColumn { .. }
                | E::EmptyAfterCleaning
                | E::NonPositivePrice { .. }
                | E::MissingSector { .. }
                | E::DegenerateSeries { .. }
                | E::SeriesTooShort { .. } => 3,
                E::DimensionMismatch { .. }
                | E::WindowTooLong { .. }
                | E::SingularRegression
                | E::TrainingDiverged { .. } => 4,
                E::Io(_) => 5,
            },
        }
    }
}
