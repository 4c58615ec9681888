//! Partial singular value thresholding and the slice-wise PSTNN proximal map.
//!
//! For a matrix `Y = U diag(sigma) V^H` with `sigma` non-increasing, the
//! minimiser of `tau * sum_{i > N} sigma_i(X) + 1/2 ||X - Y||_F^2` keeps the
//! leading `N` singular values untouched and soft-thresholds the rest:
//!
//! ```text
//! sigma'_i = sigma_i                    for i <= N
//! sigma'_i = max(sigma_i - tau, 0)      for i >  N
//! ```
//!
//! The tensor version applies this to every Fourier slice. With `N = 0`
//! it is ordinary singular value thresholding.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{fft_mode3, ifft_mode3};
use crate::svd;
use crate::talgebra::{fourier_slice_svd, map_fourier_slices, RankTarget};
use crate::tensor::Tensor3;

/// Threshold and per-slice keep counts for [`pstnn_prox_tensor`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProxParams {
    /// `lambda / beta`.
    pub tau: f64,
    pub target: RankTarget,
}

impl ProxParams {
    pub fn new(tau: f64, target: impl Into<RankTarget>) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self { tau, target: target.into() })
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidConfig("threshold tau must be positive and finite"));
    }
    Ok(())
}

/// `sign(x) * max(|x| - tau, 0)`.
#[inline]
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Entrywise signed soft-thresholding of a tensor.
pub fn shrink(t: &Tensor3, tau: f64) -> Tensor3 {
    t.map(|v| soft_threshold(v, tau))
}

/// Applies the partial thresholding rule to sorted singular values.
pub fn psvt_values(sigma: &[f64], n_keep: usize, tau: f64) -> Vec<f64> {
    sigma
        .iter()
        .enumerate()
        .map(|(i, &s)| if i < n_keep { s } else { (s - tau).max(0.0) })
        .collect()
}

/// Partial singular value thresholding of a complex matrix.
pub fn psvt_matrix(y: &DMatrix<Complex64>, n_keep: usize, tau: f64) -> Result<DMatrix<Complex64>> {
    check_tau(tau)?;
    let max = y.nrows().min(y.ncols());
    if n_keep > max {
        return Err(Error::InvalidRankTarget { slice: 0, target: n_keep, max });
    }
    let f = svd::complex_svd(y.clone(), 0)?;
    Ok(f.recompose_with(&psvt_values(&f.sigma, n_keep, tau)))
}

/// Slice-wise partial singular value thresholding in the Fourier domain:
/// every Fourier slice `B^(k)` is replaced by `psvt_matrix(B^(k), N_k, tau)`.
///
/// With `tau = lambda / beta` this minimises
/// `sum_k lambda ||X^(k)||_{p=N_k} + beta/2 ||X^(k) - B^(k)||_F^2` over the
/// Fourier slices, which under the unscaled forward transform is
/// `lambda ||X||_PSTNN + (n3 beta / 2) ||X - B||_F^2` in the original domain.
/// Conjugate slices must share their target (see
/// [`RankTarget::resolve_symmetric`]).
pub fn pstnn_prox_tensor(b: &Tensor3, params: &ProxParams) -> Result<Tensor3> {
    check_tau(params.tau)?;
    let dims = b.dims();
    let keep = params.target.resolve_symmetric(dims)?;
    let bf = fft_mode3(b);
    let xf = map_fourier_slices(&bf, dims.n1, dims.n2, |k, bf| {
        // all-kept slices pass through unchanged
        if keep[k] >= dims.min_side() {
            return Ok(bf.slice_matrix(k));
        }
        let f = fourier_slice_svd(bf, k)?;
        Ok(f.recompose_with(&psvt_values(&f.sigma, keep[k], params.tau)))
    })?;
    ifft_mode3(&xf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn diag(v: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(v.len(), v.len(), |i, j| Complex64::new(if i == j { v[i] } else { 0.0 }, 0.0))
    }

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 2.0), 1.0);
        assert_eq!(soft_threshold(-3.0, 2.0), -1.0);
        assert_eq!(soft_threshold(1.0, 2.0), 0.0);
        assert_eq!(soft_threshold(2.0, 2.0), 0.0);
    }

    #[test]
    fn psvt_keeps_head() {
        let out = psvt_matrix(&diag(&[5.0, 3.0, 1.0]), 1, 2.0).unwrap();
        assert!(close(&out, &diag(&[5.0, 1.0, 0.0]), 1e-12));
    }

    #[test]
    fn psvt_zero_keep_is_svt() {
        let out = psvt_matrix(&diag(&[5.0, 3.0, 1.0]), 0, 2.0).unwrap();
        assert!(close(&out, &diag(&[3.0, 1.0, 0.0]), 1e-12));
    }

    #[test]
    fn psvt_rejects_bad_params() {
        let y = diag(&[1.0, 2.0]);
        assert!(matches!(psvt_matrix(&y, 3, 1.0), Err(Error::InvalidRankTarget { .. })));
        assert!(matches!(psvt_matrix(&y, 1, 0.0), Err(Error::InvalidConfig(_))));
        assert!(ProxParams::new(-1.0, 0).is_err());
    }

    #[test]
    fn head_untouched_even_below_tau() {
        // kept singular values are never clamped, even when smaller than tau
        let out = psvt_matrix(&diag(&[0.5, 0.4]), 1, 10.0).unwrap();
        assert!(close(&out, &diag(&[0.5, 0.0]), 1e-12));
    }

    #[test]
    fn shrink_is_signed() {
        let t = Tensor3::from_vec((4, 1, 1), vec![-2.0, -0.5, 0.5, 3.0]).unwrap();
        assert_eq!(shrink(&t, 1.0).as_slice(), &[-1.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn full_shrinkage_gives_zero() {
        let b = Tensor3::from_fn((3, 4, 5), |i, j, k| libm::cos((i + 2 * j + 3 * k) as f64)).unwrap();
        let out = pstnn_prox_tensor(&b, &ProxParams::new(1e6, 0).unwrap()).unwrap();
        assert_eq!(out.inf_norm(), 0.0);
    }

    #[test]
    fn full_keep_is_identity() {
        let b = Tensor3::from_fn((3, 4, 6), |i, j, k| libm::cos((i + 2 * j + 3 * k) as f64)).unwrap();
        let out = pstnn_prox_tensor(&b, &ProxParams::new(0.7, 3).unwrap()).unwrap();
        assert!((&out - &b).inf_norm() < 1e-12);
    }
}
