use thiserror::Error;


pub type Result<T> = std::result::Result<T, TlsmError>;

#[derive(Debug, Error)]
pub enum TlsmError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SVD did not converge on frequency slice {slice}")]
    SvdNonConvergence { slice: usize },

    #[error("non-finite value in {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("slice of {rows}x{cols} is smaller than the {window}-sample SSIM window")]
    SliceTooSmall {
        rows: usize,
        cols: usize,
        window: usize,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed tensor file: {0}")]
    Format(String),

    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
