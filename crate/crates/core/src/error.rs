use thiserror::Error;

/// Errors surfaced by the estimation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid input series: {0}")]
    InvalidSeries(String),

    #[error("hermite order {order} exceeds the configured bound {bound}")]
    OrderOutOfRange { order: usize, bound: usize },

    #[error("leverage orders differ across samples ({expected} vs {found})")]
    MixedOrders { expected: usize, found: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// Every particle received zero likelihood at step `t`.
    #[error("total particle degeneracy at t = {t}")]
    Degenerate { t: usize },

    #[error("matrix is not numerically positive definite")]
    NotPositiveDefinite,

    #[error("grid too narrow: boundary mass {mass:.3e} at t = {t}")]
    GridTooNarrow { t: usize, mass: f64 },
}

impl SvError {
    /// True for failures caused by the numerics rather than by the caller's inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SvError::Degenerate { .. } | SvError::NotPositiveDefinite | SvError::GridTooNarrow { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, SvError>;
