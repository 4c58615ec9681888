//! ADMM solvers for PSTNN tensor completion and tensor robust PCA.
//!
//! Both solvers keep the penalty `beta` fixed for the whole run and stop
//! when three infinity-norm quantities all drop to `epsilon` or below
//! (inclusive): the change of each of the two primal blocks between
//! iterations and the feasibility residual of the splitting constraint.
//!
//! Setting the rank target to zero turns PSVT into plain singular value
//! thresholding, which gives the TNN-based variants of both solvers.

mod completion;
mod robust_pca;

use alloc::vec::Vec;

pub use completion::complete;
pub use robust_pca::rpca;

use crate::error::{Error, Result};
use crate::talgebra::RankTarget;
use crate::tensor::{Dims, Tensor3};

pub const DEFAULT_BETA_COMPLETION: f64 = 0.05;
pub const DEFAULT_BETA_RPCA: f64 = 1.0;
pub const DEFAULT_EPSILON: f64 = 1e-5;
pub const DEFAULT_MAX_ITERS: usize = 500;

/// Sparsity weight `1 / sqrt(max(n1, n2) * n3)`.
pub fn default_lambda(dims: Dims) -> f64 {
    1.0 / libm::sqrt((dims.n1.max(dims.n2) * dims.n3) as f64)
}

/// Parameters shared by both solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// ADMM penalty; the proximal threshold is `1 / beta`.
    pub beta: f64,
    /// Weight of the l1 term in robust PCA. `None` means
    /// [`default_lambda`] for the input's dims. Ignored by completion.
    pub lambda: Option<f64>,
    pub epsilon: f64,
    pub target: RankTarget,
    pub max_iters: usize,
    /// Seeds the random fill of unobserved entries in completion.
    pub seed: u64,
}

impl SolverConfig {
    /// Completion defaults for the given rank target.
    pub fn completion(target: impl Into<RankTarget>) -> Self {
        Self {
            beta: DEFAULT_BETA_COMPLETION,
            lambda: None,
            epsilon: DEFAULT_EPSILON,
            target: target.into(),
            max_iters: DEFAULT_MAX_ITERS,
            seed: 0,
        }
    }

    /// Robust PCA defaults for the given rank target.
    pub fn rpca(target: impl Into<RankTarget>) -> Self {
        Self { beta: DEFAULT_BETA_RPCA, ..Self::completion(target) }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_target(mut self, target: impl Into<RankTarget>) -> Self {
        self.target = target.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.beta) {
            return Err(Error::InvalidConfig("beta must be positive and finite"));
        }
        if !positive(self.epsilon) {
            return Err(Error::InvalidConfig("epsilon must be positive and finite"));
        }
        if let Some(l) = self.lambda {
            if !positive(l) {
                return Err(Error::InvalidConfig("lambda must be positive and finite"));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1"));
        }
        Ok(())
    }

    /// `lambda`, falling back to [`default_lambda`].
    pub fn lambda_for(&self, dims: Dims) -> f64 {
        self.lambda.unwrap_or_else(|| default_lambda(dims))
    }
}

/// The three stopping quantities of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    /// `||X^{k+1} - X^k||_inf` (completion) or `||L^{k+1} - L^k||_inf`.
    pub primary_change: f64,
    /// `||Y^{k+1} - Y^k||_inf` (completion) or `||E^{k+1} - E^k||_inf`.
    pub secondary_change: f64,
    /// `||X - Y||_inf` (completion) or `||L + E - O||_inf`.
    pub residual: f64,
}

/// Solver output.
#[derive(Debug, Clone, PartialEq)]
pub enum Recovery {
    Completed(Tensor3),
    Separated { low_rank: Tensor3, sparse: Tensor3 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub recovery: Recovery,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
}

impl RecoveryResult {
    /// The completed tensor, or the low-rank part for robust PCA.
    pub fn estimate(&self) -> &Tensor3 {
        match &self.recovery {
            Recovery::Completed(x) => x,
            Recovery::Separated { low_rank, .. } => low_rank,
        }
    }

    pub fn sparse(&self) -> Option<&Tensor3> {
        match &self.recovery {
            Recovery::Completed(_) => None,
            Recovery::Separated { sparse, .. } => Some(sparse),
        }
    }

    pub fn last_trace(&self) -> Option<&TraceRow> {
        self.trace.last()
    }
}

/// Evaluates the stopping rule. Each pair is `(previous, current)`; the
/// feasibility pair is compared directly. Converged when all three
/// infinity norms are `<= epsilon`.
pub fn check_convergence(
    iteration: usize,
    primary: (&Tensor3, &Tensor3),
    secondary: (&Tensor3, &Tensor3),
    feasibility: (&Tensor3, &Tensor3),
    epsilon: f64,
) -> Result<(bool, TraceRow)> {
    let row = TraceRow {
        iteration,
        primary_change: primary.0.inf_dist(primary.1)?,
        secondary_change: secondary.0.inf_dist(secondary.1)?,
        residual: feasibility.0.inf_dist(feasibility.1)?,
    };
    Ok((row_converged(&row, epsilon), row))
}

pub fn row_converged(row: &TraceRow, epsilon: f64) -> bool {
    row.primary_change <= epsilon && row.secondary_change <= epsilon && row.residual <= epsilon
}
