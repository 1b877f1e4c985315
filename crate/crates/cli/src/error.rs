use std::process::ExitCode;

/// Failure of a command, carrying the process exit status it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, bad config file, or parameters outside a model's domain.
    #[error("configuration error: {0}")]
    Config(String),
    /// The requested bound does not cover this regime (e.g. `δ > b_max`).
    #[error("{0}")]
    Unsupported(String),
    /// At least one verification criterion failed.
    #[error("verification failed: {0}")]
    Verification(String),
    /// Numerical or simulation failure at run time.
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) | CliError::Runtime(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Unsupported(_) => 3,
        }
    }

    pub fn exit(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<ehfade::Error> for CliError {
    fn from(e: ehfade::Error) -> Self {
        use ehfade::Error as E;
        match e {
            E::UnsupportedRegime(_) => CliError::Unsupported(e.to_string()),
            E::Domain(_) | E::InvalidModel(_) | E::InvalidConfig(_) | E::DegenerateMedian => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
