//! Tensor recovery with the t-SVD algebra.
//!
//! `tubal-core` implements third-order tensors under the t-product, the
//! t-SVD, the tensor nuclear norm (TNN) and its nonconvex partial-sum
//! variant (PSTNN), the partial singular value thresholding proximal map,
//! and ADMM solvers for tensor completion and tensor robust PCA. The crate
//! is `no_std` and needs only `alloc`.
//!
//! All Fourier transforms along mode 3 are unscaled in the forward
//! direction and carry `1/n3` in the inverse, so for example the TNN of a
//! tensor whose frontal slices all equal `M` is `n3 * ||M||_*`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod fft;
pub mod fourier;
pub mod metrics;
pub mod prox;
pub mod solvers;
pub mod svd;
pub mod synth;
pub mod talgebra;
pub mod tensor;

pub use error::{Error, Result};
pub use fourier::{fft_mode3, ifft_mode3, FourierTensor};
pub use prox::{psvt_matrix, pstnn_prox_tensor, soft_threshold, ProxParams};
pub use solvers::{complete, rpca, Recovery, RecoveryResult, SolverConfig};
pub use talgebra::{
    conj_transpose, identity_tensor, multi_rank, pstnn, t_product, t_svd, tnn, tubal_rank, MultiRank, RankTarget,
    TSvdFactors,
};
pub use tensor::{Dims, Mask, Mode, Tensor3};
