use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    Shape {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("data length {len} does not match shape {rows}x{cols}")]
    Length { rows: usize, cols: usize, len: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("operation {0} requires a nonempty matrix")]
    Empty(&'static str),

    #[error("matrix dimensions overflow: {0}")]
    SizeOverflow(String),

    #[error("singular value decomposition of a {rows}x{cols} matrix did not converge")]
    DecompositionFailed { rows: usize, cols: usize },

    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    Indefinite { eigenvalue: f64 },

    #[error("degenerate standardization: {quantity} = {value:e} is below threshold {threshold:e}")]
    DegenerateStandardization {
        quantity: &'static str,
        value: f64,
        threshold: f64,
    },

    #[error("a covariance matrix is required for the {0} statistic")]
    MissingCovariance(&'static str),

    #[error("empty solution set: hypothesis is inconsistent (residual {residual:e})")]
    EmptySolutionSet { residual: f64 },

    #[error("invalid setting: {0}")]
    InvalidSetting(String),

    #[error("sample covariance needs at least 2 rows, got {0}")]
    TooFewSamples(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid hypothesis file: {0}")]
    Hypothesis(String),

    #[error("checksum mismatch for {setting} d={d}: full {full} vs compact {compact}")]
    ChecksumMismatch {
        setting: String,
        d: usize,
        full: f64,
        compact: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::Shape {
            op,
            left_rows: left.0,
            left_cols: left.1,
            right_rows: right.0,
            right_cols: right.1,
        }
    }
}
