//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, RoughError>;

#[derive(Debug, Error)]
pub enum RoughError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A record in an input file could not be parsed; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    /// Collinear or otherwise unusable point configuration.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Query point lies outside the convex hull of the sites.
    #[error("outside hull")]
    OutsideHull,

    #[error("window exceeds DEM: window {window} vs {nrows}x{ncols} cells")]
    WindowExceedsDem {
        window: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("window must be odd and >= 3, got {0}")]
    InvalidWindow(usize),

    /// A map with no valid pixels cannot be normalized or compared.
    #[error("empty map")]
    EmptyMap,

    #[error("dimension mismatch: {a_rows}x{a_cols} vs {b_rows}x{b_cols}")]
    DimensionMismatch {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },

    /// Pearson correlation is undefined when either map has zero variance
    /// over the jointly valid pixels.
    #[error("undefined correlation: zero variance over jointly valid pixels")]
    UndefinedCorrelation,

    #[error("need at least two interpolation methods, got {0}")]
    TooFewMethods(usize),

    #[error("invalid terrain spec: {0}")]
    InvalidSpec(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
