//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Brute-force permutation oracles enumerate all n! permutations and are
    /// capped to keep that tractable.
    #[error("oracle size n = {n} exceeds the brute-force cap n <= {max} (n! terms)")]
    OracleSize { n: usize, max: usize },

    #[error("size mismatch: permutation acts on {perm_len} particles, configuration has {config_len}")]
    SizeMismatch { perm_len: usize, config_len: usize },

    #[error("arity mismatch: polynomial has {poly} coordinates, input provides {input}")]
    ArityMismatch { poly: usize, input: usize },

    #[error("polynomial is not divisible by (x_{j} - x_{i}): remainder on x_{j} <- x_{i} is nonzero")]
    NotDivisible { i: usize, j: usize },

    #[error("input is not anti-symmetric: {0}")]
    NotAntisymmetric(String),

    #[error("basis operation requires family {expected:?}, descriptor has {found:?}")]
    WrongFamily {
        expected: crate::bases::BasisFamily,
        found: crate::bases::BasisFamily,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("head invariant violated: {0}")]
    HeadInvariant(String),

    #[error("evaluation produced a non-finite value: {0}")]
    NonFinite(String),

    #[error("training aborted: {0}")]
    Training(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
