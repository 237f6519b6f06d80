//! Crate-wide error type. Variants map one-to-one onto the failure modes of
//! the pipeline stages; [`Error::exit_code`] gives the process exit code used
//! by the CLI.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // --- signal parsing ---
    #[error("expected {expected} rows, found {found}")]
    RowCountMismatch { expected: usize, found: usize },
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCountMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: non-numeric token {token:?}")]
    NonNumericToken { row: usize, token: String },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported storage format code {0} (only 16-bit little-endian is decoded)")]
    UnsupportedFormat(i64),
    #[error("expected {expected} bytes of signal data, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expected {expected} leads, found {found}")]
    WrongLeadCount { expected: usize, found: usize },
    #[error("corrupt record store: {0}")]
    CorruptStore(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    // --- dataset ---
    #[error("unknown class label {0:?}")]
    UnknownClassLabel(String),
    #[error("split {0:?} is empty")]
    EmptySplit(String),
    #[error("empty input")]
    EmptyInput,

    // --- model ---
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("shape inference failed: {0}")]
    ShapeInference(String),
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("incompatible architecture: {0}")]
    IncompatibleArchitecture(String),
    #[error("layer index {index} out of range ({len} layers)")]
    IndexOutOfRange { index: usize, len: usize },

    // --- training / transfer ---
    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    DivergedLoss { epoch: u32, batch: usize },
    #[error("missing checkpoint: {0}")]
    MissingCheckpoint(PathBuf),

    // --- metrics ---
    #[error("class {0} has no positive or no negative examples; AUC undefined")]
    DegenerateClass(usize),
    #[error("no class has a defined AUC")]
    AllDegenerate,

    // --- cli / config ---
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error("output already exists: {0} (use --force to overwrite)")]
    AlreadyExists(PathBuf),
    #[error("invalid toy spec: {0}")]
    InvalidSpec(String),
}

impl Error {
    /// Process exit code for the CLI: 2 config error, 3 missing artifact,
    /// 4 already exists, 5 diverged, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid(_) | Error::InvalidSpec(_) => 2,
            Error::MissingArtifact(_) | Error::MissingCheckpoint(_) => 3,
            Error::AlreadyExists(_) => 4,
            Error::DivergedLoss { .. } => 5,
            _ => 1,
        }
    }
}

/// Attach a path to an `io::Error`.
pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
