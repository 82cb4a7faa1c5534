use std::path::PathBuf;

/// Errors produced anywhere in the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An edge triple referenced a vertex or relation outside the declared bounds.
    #[error("edge {index} ({src}, {dst}, type {etype}) is out of range for {num_vertices} vertices / {num_etypes} edge types")]
    EdgeOutOfRange {
        index: usize,
        src: u32,
        dst: u32,
        etype: u32,
        num_vertices: usize,
        num_etypes: usize,
    },

    /// Operand shapes do not fit the operation.
    #[error("{op}: shape mismatch, expected {expected}, found {found}")]
    Shape {
        op: &'static str,
        expected: String,
        found: String,
    },

    /// A numeric or structural argument is outside its valid domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A model/stage combination that the engine cannot execute.
    #[error("configuration error: {0}")]
    Config(String),

    /// A text input could not be parsed.
    #[error("{}:{line}: {message}", source_name(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    /// Unknown model, dataset or device name.
    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn source_name(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => p.display().to_string(),
        None => "<input>".to_string(),
    }
}

impl Error {
    pub(crate) fn shape(op: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            op,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a file path to a parse error produced from in-memory text.
    pub fn at_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(path.into()),
                line,
                message,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
