//! Error type shared by the command-line layers.

use thiserror::Error;

/// Anything that can go wrong between reading a scenario file and writing
/// its artifacts. Every variant maps to exit status 1; "the analysis ran
/// but certified nothing" is not an error and is reported separately.
#[derive(Debug, Error)]
pub enum CliError {
    /// The scenario file could not be parsed; the message carries the
    /// offending field path and position.
    #[error("config error: {0}")]
    Config(String),

    /// The scenario parsed but cannot drive the requested analysis.
    #[error("input error: {0}")]
    Input(String),

    /// Validation or computation failed inside the core library.
    #[error(transparent)]
    Core(#[from] dobrushin::Error),

    /// Filesystem failure while reading scenarios or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A produced report failed its own published schema.
    #[error("internal error: {0}")]
    Internal(String),
}
