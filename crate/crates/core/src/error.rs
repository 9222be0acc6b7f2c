use thiserror::Error;

pub type Result<T> = std::result::Result<T, ReachError>;

#[derive(Debug, Error)]
pub enum ReachError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch in layer {layer}: {detail}")]
    LayerDimension { layer: usize, detail: String },

    #[error("non-finite value in layer {layer}: {detail}")]
    NonFinite { layer: usize, detail: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid analyzer config: {0}")]
    InvalidConfig(String),

    #[error("unsupported input dimension {0}: adaptive partitioning requires a 2-D input set")]
    UnsupportedDimension(usize),

    #[error("grid of {cells} cells exceeds the cap of {cap}")]
    TooManyCells { cells: u128, cap: u128 },

    #[error("error undefined: true set has zero area")]
    UndefinedError,

    #[error("arm fit did not converge: max residual {residual:.4} > {tolerance}")]
    FitFailed { residual: f64, tolerance: f64 },

    #[error("{0}")]
    Geometry(String),
}
