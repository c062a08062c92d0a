use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed header: {detail}")]
    MalformedHeader { line: usize, detail: String },

    #[error("line {line}: cell count mismatch: expected {expected} values, found {found}")]
    CellCount {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: invalid value {token:?}")]
    InvalidValue { line: usize, token: String },

    #[error("unsupported magic number {0:?}")]
    UnsupportedMagic(String),

    #[error("unsupported maxval {0}")]
    UnsupportedMaxval(u32),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("unsupported band count {0}")]
    UnsupportedBands(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("nothing to adjust")]
    NothingToAdjust,

    #[error("unmatched segment")]
    UnmatchedSegment,

    #[error("insufficient support: {found} points, need {needed}")]
    InsufficientSupport { found: usize, needed: usize },

    #[error("degenerate geometry")]
    DegenerateGeometry,

    #[error("disjoint extents")]
    DisjointExtents,

    #[error("no valid cells in scope")]
    EmptyScope,

    #[error("anchor outside raster")]
    AnchorOutsideRaster,

    #[error("ambiguous truth: buildings {0} and {1} overlap with different heights")]
    AmbiguousTruth(usize, usize),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config line {line}: {detail}")]
    Config { line: usize, detail: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by unreadable or malformed inputs.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::MalformedHeader { .. }
                | Error::CellCount { .. }
                | Error::InvalidValue { .. }
                | Error::UnsupportedMagic(_)
                | Error::UnsupportedMaxval(_)
                | Error::Truncated { .. }
                | Error::Csv(_)
                | Error::Config { .. }
        )
    }
}
