//! Mode-3 DFT transform pair and the Fourier-domain tensor.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Dft;
use crate::tensor::{Dims, Tensor3};

/// Imaginary residue tolerated when returning to the real domain,
/// relative to the Frobenius norm of the real part.
pub const REAL_RESIDUE_TOL: f64 = 1e-10;

/// Stack of `n3` complex frontal slices, same layout as [`Tensor3`].
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTensor {
    dims: Dims,
    data: Vec<Complex64>,
}

/// Index of the slice that is the complex conjugate of slice `k` when the
/// tensor came from real data.
#[inline]
pub fn conjugate_partner(k: usize, n3: usize) -> usize {
    (n3 - k) % n3
}

/// Slices `0..=n3/2`; the others follow by conjugation.
#[inline]
pub fn independent_slices(n3: usize) -> usize {
    n3 / 2 + 1
}

impl FourierTensor {
    pub fn zeros(dims: impl Into<Dims>) -> Result<Self> {
        let dims = dims.into().validate()?;
        Ok(Self { dims, data: vec![Complex64::new(0.0, 0.0); dims.len()] })
    }

    pub fn from_vec(dims: impl Into<Dims>, data: Vec<Complex64>) -> Result<Self> {
        let dims = dims.into().validate()?;
        if data.len() != dims.len() {
            return Err(Error::DataLength { dims, len: data.len() });
        }
        Ok(Self { dims, data })
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn slice(&self, k: usize) -> &[Complex64] {
        let len = self.dims.slice_len();
        &self.data[k * len..(k + 1) * len]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [Complex64] {
        let len = self.dims.slice_len();
        &mut self.data[k * len..(k + 1) * len]
    }

    pub fn slice_matrix(&self, k: usize) -> DMatrix<Complex64> {
        DMatrix::from_column_slice(self.dims.n1, self.dims.n2, self.slice(k))
    }

    /// Overwrites slice `k`; the matrix must be `n1 x n2`.
    pub fn set_slice(&mut self, k: usize, m: &DMatrix<Complex64>) {
        assert_eq!(m.shape(), (self.dims.n1, self.dims.n2));
        self.slice_mut(k).copy_from_slice(m.as_slice());
    }

    /// Sets slice `k` and, if distinct, its conjugate partner.
    pub fn set_slice_pair(&mut self, k: usize, m: &DMatrix<Complex64>) {
        self.set_slice(k, m);
        let p = conjugate_partner(k, self.dims.n3);
        if p != k {
            let len = self.dims.slice_len();
            let (src, dst) = (k * len, p * len);
            for t in 0..len {
                self.data[dst + t] = self.data[src + t].conj();
            }
        }
    }

    /// Largest entrywise deviation from conjugate symmetry, relative to the
    /// largest entry magnitude.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n3 = self.dims.n3;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for k in 0..n3 {
            let p = conjugate_partner(k, n3);
            for (a, b) in self.slice(k).iter().zip(self.slice(p)) {
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst / scale
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Unscaled forward DFT of every tube `x(i, j, :)`.
pub fn fft_mode3(x: &Tensor3) -> FourierTensor {
    let dims = x.dims();
    let plan = Dft::new(dims.n3);
    let stride = dims.slice_len();
    let mut data = vec![Complex64::new(0.0, 0.0); dims.len()];
    let mut tube = vec![Complex64::new(0.0, 0.0); dims.n3];
    let src = x.as_slice();
    for p in 0..stride {
        for (k, t) in tube.iter_mut().enumerate() {
            *t = Complex64::new(src[p + k * stride], 0.0);
        }
        plan.forward(&mut tube);
        for (k, t) in tube.iter().enumerate() {
            data[p + k * stride] = *t;
        }
    }
    FourierTensor { dims, data }
}

/// Inverse DFT (scaled by `1/n3`) of every tube, returning the real part.
///
/// Fails with [`Error::NonRealResult`] when the largest imaginary residue
/// exceeds [`REAL_RESIDUE_TOL`] times the Frobenius norm of the real part.
pub fn ifft_mode3(xf: &FourierTensor) -> Result<Tensor3> {
    let (re, residue) = ifft_mode3_parts(xf);
    let tolerance = REAL_RESIDUE_TOL * re.fro_norm();
    if residue > tolerance {
        return Err(Error::NonRealResult { residue, tolerance });
    }
    Ok(re)
}

/// Real part of the inverse transform together with the largest absolute
/// imaginary residue.
pub fn ifft_mode3_parts(xf: &FourierTensor) -> (Tensor3, f64) {
    let dims = xf.dims;
    let plan = Dft::new(dims.n3);
    let stride = dims.slice_len();
    let mut out = vec![0.0; dims.len()];
    let mut residue = 0.0f64;
    let mut tube = vec![Complex64::new(0.0, 0.0); dims.n3];
    for p in 0..stride {
        for (k, t) in tube.iter_mut().enumerate() {
            *t = xf.data[p + k * stride];
        }
        plan.inverse(&mut tube);
        for (k, t) in tube.iter().enumerate() {
            out[p + k * stride] = t.re;
            residue = residue.max(t.im.abs());
        }
    }
    let re = Tensor3::from_vec(dims, out).expect("dims already validated");
    (re, residue)
}
