use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image data: {0}")]
    CorruptData(String),
    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("requested {k} clusters for an image of {pixels} pixels")]
    TooManyClusters { k: usize, pixels: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("label {0} has no pixels")]
    EmptyLabel(u32),
    #[error("adjacency matrix has no entries")]
    EmptyMatrix,
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
