use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Spatial dimension outside the supported range.
    #[error("dimension must be an integer >= 1, got {0}")]
    InvalidDimension(i64),

    /// A numeric argument violated its documented range.
    #[error("{name} must satisfy {constraint}, got {value}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// Argument of the scaling function `h` outside `(0, 1/e]`.
    #[error("h(x) is defined for 0 < x <= 1/e, got x = {0}; in the singular renormalizations this is the condition N >= e*K")]
    ScalingFunctionDomain(f64),

    /// The particle count is too small for a singular-regime plan.
    #[error("N = {n} is below the singular-regime threshold ({condition} requires N >= {min})")]
    ParticleCountBelowThreshold {
        n: u64,
        min: u64,
        condition: &'static str,
    },

    /// A moment functional was requested in a regime where it diverges.
    #[error("moment `{moment}` is undefined for this regime: it requires {condition}, but {actual}")]
    UndefinedMoment {
        moment: &'static str,
        condition: &'static str,
        actual: String,
    },

    /// The asymmetric stable characteristic function is singular at exponent 1.
    #[error("the asymmetric stable characteristic function is singular at exponent 1; use the dedicated alpha'=1 energy branch")]
    AsymmetricExponentOne,

    /// Tail-to-stable conversion requested where the tail is in the Gaussian regime.
    #[error("alpha = {0} > 2: Gaussian regime, use the covariance matrix instead of tail coefficients")]
    GaussianRegime(f64),

    /// The requested limit diverges.
    #[error("no finite limit: {0}")]
    NoFiniteLimit(&'static str),

    /// Empirical and theoretical grids do not line up.
    #[error("mismatched grids: {0}")]
    MismatchedGrids(String),

    /// Not enough samples for the requested statistic.
    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    /// Allocation or similar resource failure; no partial results are kept.
    #[error("resource exhaustion: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
