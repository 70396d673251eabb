//! Crate-wide error type.

use std::path::PathBuf;

use crate::raster::Rect;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {path}")]
    FileMissing { path: PathBuf },

    #[error("unsupported format for {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("corrupt header in {path}: {detail}")]
    CorruptHeader { path: PathBuf, detail: String },

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid image shape: {detail}")]
    InvalidShape { detail: String },

    #[error("rect {rect:?} out of bounds for {width}x{height} image")]
    RectOutOfBounds { rect: Rect, width: u32, height: u32 },

    #[error("dimension mismatch: {expected:?} vs {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("feature dimension mismatch: {left} vs {right}")]
    FeatureDimMismatch { left: usize, right: usize },

    #[error("domain error: input {value} is negative")]
    NegativeDomain { value: f64 },

    #[error("k = {k} is infeasible: only {distinct} distinct points")]
    InfeasibleK { k: usize, distinct: usize },

    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    WindowTooLarge {
        window: usize,
        width: u32,
        height: u32,
    },

    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tag an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
