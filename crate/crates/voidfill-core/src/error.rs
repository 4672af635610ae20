use thiserror::Error;

/// Errors shared across the raster, solver and interpolation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("expected {expected} values, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("non-numeric token {0:?}")]
    NonNumericToken(String),
    #[error("unsupported magic {0:?} (binary P5/P6 only)")]
    UnsupportedMagic(String),
    #[error("maxval must be 255, got {0}")]
    MaxvalNot255(u32),
    #[error("truncated payload: expected {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("grid contains nodata cells")]
    HasNodata,
    #[error("no known cells")]
    NoKnownCells,
    #[error("every cell is void")]
    AllVoid,
    #[error("tensor is not positive definite at ({row}, {col})")]
    NotSpd { row: usize, col: usize },
    #[error("degenerate sample geometry (collinear samples)")]
    DegenerateGeometry,
    #[error("empty evaluation region")]
    EmptyRegion,
    #[error("truth grid has nodata inside the evaluation region")]
    TruthHasNodata,
    #[error("coverage target not reached after {0} tries")]
    CoverageUnreachable(usize),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
