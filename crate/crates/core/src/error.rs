use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("image dimensions must be positive, got {width} x {height}")]
    InvalidImageSize { width: f64, height: f64 },

    #[error("cfg line {line}: {message}")]
    CfgParse { line: usize, message: String },

    #[error("layer {layer}: {message}")]
    Shape { layer: usize, message: String },

    #[error("tensor: {0}")]
    Tensor(String),

    #[error("expected {expected} anchors, got {actual}")]
    AnchorCount { expected: usize, actual: usize },

    #[error("box at index {0} has no confidence")]
    MissingConfidence(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Annotation {
        path: String,
        line: usize,
        message: String,
    },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
