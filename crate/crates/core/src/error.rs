use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("plane-strain constitutive matrix is singular for poisson ratio {nu} (need nu < 0.5)")]
    ConstitutiveSingularity { nu: f64 },

    #[error("wavenumber {gamma} rad/m outside [0, {max}]")]
    WavenumberOutOfRange { gamma: f64, max: f64 },

    #[error("eigensolver failed at gamma = {gamma} rad/m: {reason}")]
    Eigen { gamma: f64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("time integration became unstable at step {step} (t = {time} s)")]
    Instability { step: usize, time: f64 },

    #[error("resampling error: {0}")]
    Resampling(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("insufficient texture: {0}")]
    InsufficientTexture(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed container {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("image encoding failed: {0}")]
    Image(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier used in machine-parsable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "invalid-geometry",
            Error::InvalidMaterial(_) => "invalid-material",
            Error::ConstitutiveSingularity { .. } => "constitutive-singularity",
            Error::WavenumberOutOfRange { .. } => "out-of-range",
            Error::Eigen { .. } => "eigensolver",
            Error::Config(_) => "config",
            Error::Instability { .. } => "instability",
            Error::Resampling(_) => "resampling",
            Error::Size(_) => "size",
            Error::InsufficientTexture(_) => "insufficient-texture",
            Error::InsufficientSamples(_) => "insufficient-samples",
            Error::Range(_) => "range",
            Error::Degenerate(_) => "degenerate",
            Error::Shape(_) => "shape",
            Error::Contract(_) => "contract",
            Error::Domain(_) => "domain",
            Error::Format { .. } => "format",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Image(_) => "image",
        }
    }
}
