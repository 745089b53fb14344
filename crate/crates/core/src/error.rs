use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A file could not be parsed. `line` is 1-based when known.
    #[error("{}parse error{}: {message}", path_prefix(.path), line_suffix(.line))]
    Parse { path: Option<PathBuf>, line: Option<usize>, message: String },

    /// Inputs violate a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A representation could not be fitted on the given data (for example
    /// the vocabulary is empty after stopword removal).
    #[error("representation failure: {0}")]
    RepresentationFailure(String),

    /// A knowledge base was produced with a different registry or schema.
    #[error("incompatible knowledge base: expected {expected}, found {found}")]
    Incompatible { expected: String, found: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

fn path_prefix(path: &Option<PathBuf>) -> String {
    path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default()
}

fn line_suffix(line: &Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(path: Option<PathBuf>, line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Parse { path, line, message: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad user input rather than internal failures.
    pub fn is_user_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Validation(_) | Error::Incompatible { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
