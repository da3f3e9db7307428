use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A structural parameter is non-finite or out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Sample count too small for the requested operation.
    #[error("sample size {n} is too small (need at least {min})")]
    SampleSize { n: usize, min: usize },

    /// Two vectors that must align do not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Regressor with zero norm; the OLS slope is undefined.
    #[error("degenerate regressor: x.x = 0")]
    DegenerateRegressor,

    /// The sample mean in the ratio estimator is statistically
    /// indistinguishable from zero, so the ratio is unusable.
    #[error("unstable ratio denominator: |mean| = {mean_abs:.3e} below threshold {threshold:.3e} (confounder mean must be nonzero)")]
    UnstableDenominator { mean_abs: f64, threshold: f64 },

    /// Rank-deficient or ill-conditioned polynomial design matrix.
    #[error("singular polynomial design matrix (order {order})")]
    SingularDesign { order: usize },

    /// Instrumental denominator below the configured tolerance.
    #[error("near-pole instrumental denominator: |r.m| = {denom_abs:.3e} below {threshold:.3e}")]
    NearPole { denom_abs: f64, threshold: f64 },

    /// A denominator is exactly zero; no estimate can be formed.
    #[error("degenerate denominator in {context}")]
    DegenerateDenominator { context: &'static str },

    /// Polynomial coupling fails its invertibility condition.
    #[error("non-invertible polynomial: {0}")]
    NonInvertible(String),

    /// Prior instrument is uncorrelated with the treatment.
    #[error("weak instrument: |x.v| = {dot_abs:.3e} below {threshold:.3e}")]
    WeakInstrument { dot_abs: f64, threshold: f64 },

    /// Closed-form expression evaluated at its pole.
    #[error("pole: {0}")]
    Pole(String),

    /// Gaussian conditioning block is singular.
    #[error("singular conditioning block")]
    SingularConditioning,

    /// Problems reading a cohort CSV.
    #[error("ingest error: {0}")]
    Ingest(String),

    /// Malformed configuration or grid specification.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
