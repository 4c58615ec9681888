//! Dense third-order tensors and observation masks.
//!
//! Entries are stored in one flat buffer in slice-major order: the frontal
//! slice index varies slowest, and within a frontal slice the storage is
//! column-major. Entry `(i, j, k)` lives at `i + n1 * (j + n2 * k)`, so every
//! frontal slice is a contiguous column-major `n1 x n2` block.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Mode sizes `(n1, n2, n3)` of a third-order tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Dims {
    pub const fn new(n1: usize, n2: usize, n3: usize) -> Self {
        Self { n1, n2, n3 }
    }

    pub fn validate(self) -> Result<Self> {
        if self.n1 == 0 || self.n2 == 0 || self.n3 == 0 {
            return Err(Error::InvalidDims(self));
        }
        Ok(self)
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn slice_len(self) -> usize {
        self.n1 * self.n2
    }

    /// `min(n1, n2)`, the largest possible rank of a frontal slice.
    #[inline]
    pub fn min_side(self) -> usize {
        self.n1.min(self.n2)
    }

    #[inline]
    pub const fn offset(self, i: usize, j: usize, k: usize) -> usize {
        i + self.n1 * (j + self.n2 * k)
    }

    pub fn as_tuple(self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.n3)
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.n1, self.n2, self.n3)
    }
}

impl From<(usize, usize, usize)> for Dims {
    fn from((n1, n2, n3): (usize, usize, usize)) -> Self {
        Self::new(n1, n2, n3)
    }
}

/// Dense real tensor of shape `n1 x n2 x n3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: Dims,
    data: Vec<f64>,
}

/// Mode selector for unfoldings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Tensor3 {
    pub fn zeros(dims: impl Into<Dims>) -> Result<Self> {
        let dims = dims.into().validate()?;
        Ok(Self { dims, data: vec![0.0; dims.len()] })
    }

    pub fn from_vec(dims: impl Into<Dims>, data: Vec<f64>) -> Result<Self> {
        let dims = dims.into().validate()?;
        if data.len() != dims.len() {
            return Err(Error::DataLength { dims, len: data.len() });
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: impl Into<Dims>, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let dims = dims.into().validate()?;
        let mut data = Vec::with_capacity(dims.len());
        for k in 0..dims.n3 {
            for j in 0..dims.n2 {
                for i in 0..dims.n1 {
                    data.push(f(i, j, k));
                }
            }
        }
        Ok(Self { dims, data })
    }

    /// Builds a tensor whose frontal slices are the given matrices.
    pub fn from_slices(slices: &[DMatrix<f64>]) -> Result<Self> {
        let first = slices.first().ok_or(Error::InvalidDims(Dims::new(0, 0, 0)))?;
        let dims = Dims::new(first.nrows(), first.ncols(), slices.len()).validate()?;
        let mut data = Vec::with_capacity(dims.len());
        for s in slices {
            if s.shape() != (dims.n1, dims.n2) {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: Dims::new(s.nrows(), s.ncols(), slices.len()),
                });
            }
            data.extend_from_slice(s.as_slice());
        }
        Ok(Self { dims, data })
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.dims.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.dims.offset(i, j, k);
        self.data[o] = v;
    }

    /// Frontal slice `k` as a column-major borrow.
    pub fn frontal(&self, k: usize) -> &[f64] {
        let len = self.dims.slice_len();
        &self.data[k * len..(k + 1) * len]
    }

    pub fn frontal_mut(&mut self, k: usize) -> &mut [f64] {
        let len = self.dims.slice_len();
        &mut self.data[k * len..(k + 1) * len]
    }

    pub fn frontal_matrix(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.dims.n1, self.dims.n2, self.frontal(k))
    }

    /// Tube `x(i, j, :)`.
    pub fn tube(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dims.n3).map(|k| self.get(i, j, k)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn ensure_same_dims(&self, other: &Tensor3) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, found: other.dims });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor3 {
        Tensor3 { dims: self.dims, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Elementwise combination of two tensors of equal dims.
    pub fn zip_map(&self, other: &Tensor3, f: impl Fn(f64, f64) -> f64) -> Result<Tensor3> {
        self.ensure_same_dims(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Tensor3 { dims: self.dims, data })
    }

    pub fn scale(&self, c: f64) -> Tensor3 {
        self.map(|v| c * v)
    }

    /// Sum of entrywise products.
    pub fn inner(&self, other: &Tensor3) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn fro_norm(&self) -> f64 {
        libm::sqrt(self.fro_norm_sq())
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Largest absolute entry.
    pub fn inf_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self - other|` without materialising the difference.
    pub fn inf_dist(&self, other: &Tensor3) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mode-`n` unfolding.
    ///
    /// Row index is `i_n`; the column index enumerates the remaining two
    /// indices with the lower mode varying fastest, e.g. mode 1 puts
    /// `(i2, i3)` at column `i2 + n2 * i3`.
    pub fn unfold(&self, mode: Mode) -> DMatrix<f64> {
        let Dims { n1, n2, n3 } = self.dims;
        match mode {
            Mode::One => DMatrix::from_fn(n1, n2 * n3, |i, c| self.get(i, c % n2, c / n2)),
            Mode::Two => DMatrix::from_fn(n2, n1 * n3, |j, c| self.get(c % n1, j, c / n1)),
            Mode::Three => DMatrix::from_fn(n3, n1 * n2, |k, c| self.get(c % n1, c / n1, k)),
        }
    }

    /// Inverse of [`Tensor3::unfold`].
    pub fn fold(m: &DMatrix<f64>, mode: Mode, dims: impl Into<Dims>) -> Result<Tensor3> {
        let dims = dims.into().validate()?;
        let Dims { n1, n2, n3 } = dims;
        let expected = match mode {
            Mode::One => (n1, n2 * n3),
            Mode::Two => (n2, n1 * n3),
            Mode::Three => (n3, n1 * n2),
        };
        if m.shape() != expected {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: Dims::new(m.nrows(), m.ncols(), 1),
            });
        }
        Tensor3::from_fn(dims, |i, j, k| match mode {
            Mode::One => m[(i, j + n2 * k)],
            Mode::Two => m[(j, i + n1 * k)],
            Mode::Three => m[(k, i + n1 * j)],
        })
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;

    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[self.dims.offset(i, j, k)]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        let o = self.dims.offset(i, j, k);
        &mut self.data[o]
    }
}

// Arithmetic operators panic on mismatched dims, like nalgebra's.
impl Add for &Tensor3 {
    type Output = Tensor3;

    fn add(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_map(rhs, |a, b| a + b).expect("tensor dims must agree")
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;

    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        self.zip_map(rhs, |a, b| a - b).expect("tensor dims must agree")
    }
}

impl Mul<f64> for &Tensor3 {
    type Output = Tensor3;

    fn mul(self, rhs: f64) -> Tensor3 {
        self.scale(rhs)
    }
}

/// Set of observed entries of a tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    dims: Dims,
    observed: Vec<bool>,
}

impl Mask {
    pub fn all(dims: impl Into<Dims>, observed: bool) -> Result<Self> {
        let dims = dims.into().validate()?;
        Ok(Self { dims, observed: vec![observed; dims.len()] })
    }

    pub fn from_vec(dims: impl Into<Dims>, observed: Vec<bool>) -> Result<Self> {
        let dims = dims.into().validate()?;
        if observed.len() != dims.len() {
            return Err(Error::DataLength { dims, len: observed.len() });
        }
        Ok(Self { dims, observed })
    }

    /// Nonzero entries of `t` are observed.
    pub fn from_tensor(t: &Tensor3) -> Self {
        Self { dims: t.dims(), observed: t.as_slice().iter().map(|&v| v != 0.0).collect() }
    }

    /// 0/1 indicator tensor.
    pub fn to_tensor(&self) -> Tensor3 {
        let data = self.observed.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Tensor3 { dims: self.dims, data }
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn is_observed(&self, i: usize, j: usize, k: usize) -> bool {
        self.observed[self.dims.offset(i, j, k)]
    }

    #[inline]
    pub fn as_slice(&self) -> &[bool] {
        &self.observed
    }

    pub fn count(&self) -> usize {
        self.observed.iter().filter(|&&b| b).count()
    }

    /// The complement set.
    pub fn complement(&self) -> Mask {
        Mask { dims: self.dims, observed: self.observed.iter().map(|b| !b).collect() }
    }

    /// Keeps the entries of `t` on the mask and zeroes the rest.
    pub fn project(&self, t: &Tensor3) -> Result<Tensor3> {
        if t.dims() != self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, found: t.dims() });
        }
        let data = t.as_slice().iter().zip(&self.observed).map(|(&v, &b)| if b { v } else { 0.0 }).collect();
        Ok(Tensor3 { dims: self.dims, data })
    }
}
