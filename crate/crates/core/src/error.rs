use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading, indexing, interpolating or writing scattered data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: empty manifest", path.display())]
    EmptyManifest { path: PathBuf },

    #[error("{}: non-increasing time at line {line}", path.display())]
    NonIncreasingTime { path: PathBuf, line: usize },

    #[error("{}: point count mismatch ({found} vs {expected})", path.display())]
    PointCountMismatch {
        path: PathBuf,
        found: usize,
        expected: usize,
    },

    #[error("invalid column map: {0}")]
    ColumnMap(String),

    #[error("empty point cloud")]
    EmptyCloud,

    #[error("empty target set")]
    EmptyTargetSet,

    #[error("row count mismatch: {points} points but {values} value rows")]
    RowMismatch { points: usize, values: usize },

    #[error("k must be at least 1")]
    ZeroNeighbors,

    #[error("search radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("query has dimension {found}, index has dimension {expected}")]
    DimensionMismatch { found: usize, expected: usize },

    #[error("non-finite query coordinate")]
    NonFiniteQuery,

    #[error("degenerate cloud: zero bounding-box diagonal with nonzero neighbor distances")]
    DegenerateCloud,

    #[error("invalid interpolation parameters: {0}")]
    InvalidParams(String),

    #[error("step {step} out of range for {steps} stored steps")]
    StepOutOfRange { step: usize, steps: usize },

    #[error("{}:{line}: bad node id {id}", path.display())]
    BadNodeId {
        path: PathBuf,
        line: usize,
        id: String,
    },

    #[error("{}:{line}: unknown element kind '{kind}'", path.display())]
    UnknownElementKind {
        path: PathBuf,
        line: usize,
        kind: String,
    },

    #[error("degenerate element {element}")]
    DegenerateElement { element: usize },

    #[error("inverted element {element}")]
    InvertedElement { element: usize },

    #[error("unsupported quadrature order {order} for {kind}")]
    UnsupportedOrder { kind: &'static str, order: usize },

    #[error("element {element} out of range")]
    ElementOutOfRange { element: usize },

    #[error("empty region{}", .0.as_ref().map(|r| format!(" '{r}'")).unwrap_or_default())]
    EmptyRegion(Option<String>),

    #[error("{}: missing required key '{key}'", path.display())]
    MissingKey { path: PathBuf, key: String },

    #[error("{}: duplicate quantity id '{id}'", path.display())]
    DuplicateQuantityId { path: PathBuf, id: String },

    #[error("unknown knnLib '{0}'")]
    UnknownKnnLib(String),

    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("step {step} (t = {time}): {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
