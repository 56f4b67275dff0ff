use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("unreadable source {0}")]
    UnreadableSource(String),

    /// Declared geometry and the bytes actually delivered disagree.
    #[error("geometry mismatch at byte offset {offset}: {message}")]
    Geometry { offset: u64, message: String },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("crop {roi} outside {width}x{height} frame")]
    CropOutOfBounds {
        roi: crate::frame::Roi,
        width: u32,
        height: u32,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("model {path}: {message}")]
    Model { path: PathBuf, message: String },

    #[error("backend failure: {0}")]
    Backend(String),

    #[error("classifier failed at frame {frame}: {source}")]
    Classifier {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("oracle has no label for frames ({0}, {1})")]
    OracleMissing(usize, usize),

    #[error("invalid segments: {0}")]
    Segments(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("validation failed: {}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),

    /// Failure inside one pipeline stage.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// One schema or invariant violation, located by a JSON-style field path
/// such as `slide_intervals[3].end`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ValidationIssue {
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("{}: {}", i.path, i.message))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
