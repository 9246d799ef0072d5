use thiserror::Error;

/// Errors raised by lattice construction and entropy evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid dispersion: {0}")]
    InvalidDispersion(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("regularization failure: non-positive mode omega = {omega:e} at k = {k:?}")]
    Regularization { k: Vec<f64>, omega: f64 },

    #[error("coupling transform is not real: |Im V| = {0:e} at displacement {1:?}")]
    ComplexCoupling(f64, Vec<i64>),

    #[error("dense path limited to {cap} sites, requested {sites}; use the chain decomposition")]
    DenseTooLarge { sites: usize, cap: usize },

    #[error("correlation matrix not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("eigensolve failed: {0}")]
    Eigensolve(String),

    #[error("region is not a belt: {0}")]
    NotABelt(String),

    #[error("scaling fit: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the request.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Regularization { .. }
                | Error::ComplexCoupling(..)
                | Error::NotPositiveDefinite(_)
                | Error::Eigensolve(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
