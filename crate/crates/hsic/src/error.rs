//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by sample validation, kernel evaluation, statistics, and
/// the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A sample with zero observations.
    #[error("empty sample")]
    EmptySample,

    /// A non-finite (NaN or infinite) value in user-supplied data.
    #[error("non-finite value in input: {0}")]
    NonFinite(String),

    /// Functional grid with fewer than two points.
    #[error("time grid needs at least 2 points, got {0}")]
    GridTooShort(usize),

    /// Functional grid that is not strictly increasing.
    #[error("time grid must be strictly increasing (violated at index {0})")]
    GridNotIncreasing(usize),

    /// A curve row whose length does not match the grid.
    #[error("row {row} has {found} values, expected {expected}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },

    /// An operation that needs more observations than the sample has.
    #[error("operation needs at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    /// Two paired inputs with different sample sizes.
    #[error("sample size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    /// Mixing an unbiased-centered Gram with a biased-centered one.
    #[error("centering mode mismatch between the two Gram matrices")]
    ModeMismatch,

    /// An invalid parameter value (width, alpha, rho, permutation count, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// All pairwise distances are zero, so no kernel width exists.
    #[error("degenerate sample: all observations identical, kernel width undefined")]
    DegenerateSample,

    /// The null approximation has no variance to match (e.g. a constant
    /// kernel), so no p-value can be produced.
    #[error("degenerate null distribution: {0}")]
    DegenerateNull(String),

    /// An internal numerical failure (non-convergence, impossible negative
    /// variance estimate, Cholesky breakdown).
    #[error("numeric failure: {0}")]
    Numeric(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
