use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix dimensions must be at least 1x1")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("initial reservoir matrix has (near) zero spectral radius after {attempts} attempts")]
    DegenerateW0 { attempts: usize },
    #[error("series too short: need more than {needed} steps, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("Gram matrix is singular; use a positive ridge parameter")]
    SingularGram,
    #[error("state sequence is empty")]
    EmptyStates,
    #[error("aperture must be positive, got {0}")]
    NonPositiveAperture(f64),
    #[error("input is empty")]
    EmptyInput,
    #[error("channel mismatch: expected {expected} channels, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("polynomial degree must be at least 1, got {0}")]
    BadDegree(usize),
    #[error("frame length {0} is not a power of two")]
    NonPowerOfTwoFrame(usize),
    #[error("class {0} has no training samples")]
    EmptyClass(String),
    #[error("at least two classes are required")]
    SingleClass,
    #[error("class {class} has {got} samples, cross-validation needs at least {needed}")]
    TooFewSamplesPerClass { class: String, got: usize, needed: usize },
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid synthetic dataset spec: {0}")]
    BadSpec(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unsupported audio: {0}")]
    UnsupportedAudio(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dims(expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch { expected: expected.to_string(), got: got.to_string() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, column, message: message.into() }
    }
}
