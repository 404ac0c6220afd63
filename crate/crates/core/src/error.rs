use std::path::PathBuf;

/// Errors produced across the pipeline.
///
/// Variants are grouped by what the caller can do about them: `kind()`
/// separates bad input data from numeric failures so front ends can map
/// them to distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid drawing: {0}")]
    InvalidDrawing(String),

    #[error("malformed sequence at index {index}: {reason}")]
    MalformedSequence { index: usize, reason: &'static str },

    #[error("image too small: {width}x{height} (need at least 3x3)")]
    ImageTooSmall { width: usize, height: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid tour: {0}")]
    InvalidTour(String),

    #[error("instance too large for the exact solver: {strokes} strokes (max {max}); use solve_heuristic")]
    InstanceTooLarge { strokes: usize, max: usize },

    #[error("sequence {index} has no valid steps")]
    EmptySequence { index: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("balanced accuracy undefined: no {0} targets present")]
    UndefinedClass(&'static str),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unknown configuration name `{name}`; valid forms: {valid}")]
    UnknownConfig { name: String, valid: String },

    #[error("plans differ in more than format, ordering and configuration: {0}")]
    PlansDiffer(String),

    #[error("unsupported head: {0}")]
    UnsupportedHead(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("not enough qualifying drawings: wanted {wanted}, found {found}")]
    NotEnoughDrawings { wanted: usize, found: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("image decode: {0}")]
    Image(#[from] image::ImageError),
}

/// Coarse classification used by front ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Data,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Numeric(_) => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
