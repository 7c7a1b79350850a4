//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by model construction, test evaluation and I/O.
#[derive(Debug, Error)]
pub enum HbrError {
    /// A model or test parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `1/bump_width` is not an integer, so the window grid does not exist.
    #[error("non-admissible bump width {bump_width}: 1/bump_width = {reciprocal} is not integral")]
    NonAdmissibleGrid { bump_width: f64, reciprocal: f64 },

    /// The sample count is too small for the requested grid.
    #[error("sample count {n} is smaller than the number of windows {windows}")]
    SampleCountTooSmall { n: usize, windows: usize },

    /// A window index outside `1..=l`.
    #[error("window index {index} out of range 1..={windows}")]
    WindowOutOfRange { index: usize, windows: usize },

    /// A window has fewer than two points, so its sample variance is undefined.
    #[error("window {index} has {size} point(s); the adaptive statistic needs at least 2")]
    DegenerateWindow { index: usize, size: usize },

    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The paper provides no result for the requested query.
    #[error("unsupported query: {0}")]
    Unsupported(String),

    /// A malformed row in an observations CSV file.
    #[error("CSV parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, HbrError>;
