use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver did not converge (realization {index:?})")]
    EigenNoConvergence { index: Option<u64> },

    #[error("time grid mismatch: accumulator grid {expected:#018x}, curve grid {found:#018x}")]
    GridMismatch { expected: u64, found: u64 },

    #[error("relative variance needs at least two realizations, got {0}")]
    SingletonEnsemble(u64),

    #[error("time grid too short: need t_max >= 10 * t_min for a final decade, got [{t_min}, {t_max}]")]
    GridTooShort { t_min: f64, t_max: f64 },

    #[error("filtered partition function underflowed to zero")]
    PartitionUnderflow,

    #[error("eigenvalue filter vanishes at level {n}")]
    ZeroEigenWeight { n: usize },

    #[error("frequency filter weight below floor at pair ({n}, {m})")]
    ZeroPairWeight { n: usize, m: usize },

    #[error("free-energy deformation requires beta > 0")]
    ZeroBeta,

    #[error("step size {step:e} exceeds the stability limit {limit:e}")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("signal length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("heaviside schedules are a single kick: use kick_evolve")]
    KickSchedule,

    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
