use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("radius {index} is not finite ({value})")]
    NonFiniteRadius { index: usize, value: f64 },

    #[error("radius {index} is negative ({value})")]
    NegativeRadius { index: usize, value: f64 },

    #[error("codebook must contain at least one centroid")]
    EmptyCodebook,

    #[error("centroid {index} is not finite")]
    NonFiniteCentroid { index: usize },

    #[error("source variance must be positive and finite, got {0}")]
    InvalidVariance(f64),

    #[error("index {n} out of range 1..={size}")]
    IndexOutOfRange { n: usize, size: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error(
        "quadrature grid too coarse: centroid {index} captured no grid points \
         (raise the grid resolution or extent)"
    )]
    GridTooCoarse { index: usize },

    #[error(
        "Lloyd-Max cell for centroid {index} captured no probability mass at iteration {iteration}; \
         increase grid resolution (--grid-m) or start from the high-rate radii"
    )]
    EmptyCell { index: usize, iteration: usize },

    #[error("all centroids at the origin; PAPR undefined")]
    ZeroPower,

    #[error("{n} is not usable for {scheme}: {reason}")]
    InvalidN {
        scheme: &'static str,
        n: usize,
        reason: String,
    },

    #[error("scheme `{0}` not supported here")]
    InvalidScheme(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed codebook file, field `{field}`: {reason}")]
    Format { field: String, reason: String },
}

impl Error {
    pub(crate) fn format(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
