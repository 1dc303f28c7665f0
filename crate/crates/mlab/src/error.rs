use thiserror::Error;

/// Unified error type for the toolkit.
///
/// The variants map onto the CLI exit-code contract:
/// `Config` -> 2, `Accuracy`/`Internal` -> 3. Check failures are not errors;
/// they are reported as verdicts.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// Several configuration violations collected in one pass.
    #[error("configuration errors:\n{}", .0.join("\n"))]
    ConfigList(Vec<String>),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("registry error: unknown check id `{0}`; known ids: {1}")]
    UnknownCheck(String, String),

    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code for the CLI contract: 2 = config error, 3 = internal/accuracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigList(_) | Error::UnknownCheck(..) => 2,
            _ => 3,
        }
    }
}
