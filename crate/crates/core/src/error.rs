use thiserror::Error;

use crate::tensor::Dims;

/// Errors produced by the tensor algebra, proximal maps and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: Dims, found: Dims },

    #[error("invalid dimensions {0}: every mode must be at least 1")]
    InvalidDims(Dims),

    #[error("data length {len} does not match dims {dims}")]
    DataLength { dims: Dims, len: usize },

    #[error("inverse transform is not real: imaginary residue {residue:e} exceeds {tolerance:e}")]
    NonRealResult { residue: f64, tolerance: f64 },

    #[error("SVD of Fourier slice {slice} did not converge")]
    SvdFailure { slice: usize },

    #[error("rank target {target} out of range 0..={max} (slice {slice})")]
    InvalidRankTarget { slice: usize, target: usize, max: usize },

    #[error("rank targets of conjugate Fourier slices {slice} and {partner} differ")]
    AsymmetricRankTarget { slice: usize, partner: usize },

    #[error("rank target has {found} entries, expected {expected}")]
    RankTargetLength { expected: usize, found: usize },

    #[error("invalid rank {rank}: must lie in 1..={max}")]
    InvalidRank { rank: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("reference tensor is zero")]
    ZeroReference,

    #[error("tensor contains non-finite values")]
    NonFinite,
}

pub type Result<T> = core::result::Result<T, Error>;
