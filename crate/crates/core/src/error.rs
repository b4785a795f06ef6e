use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}")]
    BadDimension(usize),
    #[error("bad format: {0}")]
    BadFormat(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cube {small} is not contained in {big}")]
    NotNested { small: String, big: String },
    #[error("set needs resolution level {needed}, grid has {got}")]
    ResolutionTooCoarse { needed: u32, got: u32 },
    #[error("mollifier scale {scale} is finer than the grid spacing {spacing}")]
    ScaleTooFine { scale: f64, spacing: f64 },
    #[error("function has zero variation; the weight is undefined")]
    DegenerateFunction,
    #[error("cube family does not cover the unit cube")]
    NotACovering,
    #[error("{inner} is not a proper subcube of {outer}")]
    NotProperSubcube { inner: String, outer: String },
    #[error("operation needs dimension 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
