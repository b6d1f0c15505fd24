use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("invalid image dimensions {width}x{height} for {len} samples")]
    InvalidDimensions {
        width: usize,
        height: usize,
        len: usize,
    },

    #[error("image {width}x{height} is too small: {what} needs at least {min}x{min}")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
        what: &'static str,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown objective `{0}`")]
    UnknownObjective(String),

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image format for {0}")]
    UnsupportedFormat(PathBuf),
}

pub type Result<T> = std::result::Result<T, FusionError>;

impl FusionError {
    pub(crate) fn mismatch(a: (usize, usize), b: (usize, usize)) -> Self {
        FusionError::DimensionMismatch {
            left_w: a.0,
            left_h: a.1,
            right_w: b.0,
            right_h: b.1,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        FusionError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
