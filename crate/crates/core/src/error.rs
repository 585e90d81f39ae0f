use thiserror::Error;

/// Everything that can go wrong inside the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("eigensolver failed to converge after {iterations} iterations at index {index}")]
    NoConvergence { index: usize, iterations: usize },

    #[error("{requested} is not an eigenvalue (nearest is {nearest}, distance {distance:e})")]
    NotAnEigenvalue { requested: f64, nearest: f64, distance: f64 },

    /// `J_2` (p = 2) or `J_3` (p = 3) vanishes; the edge mode sits entirely on the
    /// right-most cell and the decay factor is unbounded.
    #[error("decay factor diverges: the edge state is decoupled at the right end")]
    RightDecoupled,

    #[error("time {t} outside schedule range [0, {t_final}]")]
    TimeOutOfRange { t: f64, t_final: f64 },

    #[error("state norm {norm} deviates from 1 by more than {tolerance:e}")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("norm drift {drift:e} exceeds {limit:e}; reduce dt (currently {dt})")]
    NormDrift { drift: f64, limit: f64, dt: f64 },

    #[error("sample with seed {seed} at W = {w} failed: {source}")]
    Sample {
        seed: u64,
        w: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
