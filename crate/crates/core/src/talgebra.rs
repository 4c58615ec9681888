//! t-product algebra and the t-SVD.
//!
//! Every operation here works slice-wise in the Fourier domain. For a real
//! tensor the Fourier slices come in conjugate pairs `(k, n3 - k)`, so only
//! slices `0..=n3/2` are ever factorised; the rest are filled in by
//! conjugation, which keeps inverse transforms exactly real. Slice 0 and,
//! for even `n3`, slice `n3/2` are real matrices and are factorised as such.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{conjugate_partner, fft_mode3, ifft_mode3, independent_slices, FourierTensor};
use crate::svd::{self, SliceSvd};
use crate::tensor::{Dims, Tensor3};

/// Per-slice target `N` for the partial sum of singular values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankTarget {
    /// Same `N` on every Fourier slice.
    Uniform(usize),
    /// One `N_k` per Fourier slice.
    PerSlice(Vec<usize>),
}

impl RankTarget {
    /// Expands to one entry per slice, checking `0 <= N_k <= min(n1, n2)`.
    pub fn resolve(&self, dims: Dims) -> Result<Vec<usize>> {
        let max = dims.min_side();
        let ranks = match self {
            RankTarget::Uniform(n) => vec![*n; dims.n3],
            RankTarget::PerSlice(v) => {
                if v.len() != dims.n3 {
                    return Err(Error::RankTargetLength { expected: dims.n3, found: v.len() });
                }
                v.clone()
            }
        };
        if let Some((slice, &target)) = ranks.iter().enumerate().find(|(_, &n)| n > max) {
            return Err(Error::InvalidRankTarget { slice, target, max });
        }
        Ok(ranks)
    }
}

impl RankTarget {
    /// Like [`RankTarget::resolve`], and additionally requires conjugate
    /// slices `k` and `n3 - k` to share a target, which a real-valued
    /// proximal step needs.
    pub fn resolve_symmetric(&self, dims: Dims) -> Result<Vec<usize>> {
        let ranks = self.resolve(dims)?;
        for k in 1..dims.n3 {
            let partner = conjugate_partner(k, dims.n3);
            if ranks[k] != ranks[partner] {
                return Err(Error::AsymmetricRankTarget { slice: k.min(partner), partner: k.max(partner) });
            }
        }
        Ok(ranks)
    }
}

impl From<usize> for RankTarget {
    fn from(n: usize) -> Self {
        RankTarget::Uniform(n)
    }
}

/// Ranks of the Fourier-domain frontal slices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiRank {
    pub ranks: Vec<usize>,
}

impl MultiRank {
    /// The tubal rank, `max_k ranks[k]`.
    pub fn tubal_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    /// `sum_k ranks[k]`, the rank of the block-diagonal Fourier matrix.
    pub fn total(&self) -> usize {
        self.ranks.iter().sum()
    }
}

/// Factors of `a = u * s * v^T`.
#[derive(Debug, Clone)]
pub struct TSvdFactors {
    /// `n1 x n1 x n3`, orthogonal.
    pub u: Tensor3,
    /// `n1 x n2 x n3`, f-diagonal.
    pub s: Tensor3,
    /// `n2 x n2 x n3`, orthogonal.
    pub v: Tensor3,
}

#[inline]
fn is_self_conjugate(k: usize, n3: usize) -> bool {
    conjugate_partner(k, n3) == k
}

/// SVD of Fourier slice `k`; self-conjugate slices are treated as real.
pub(crate) fn fourier_slice_svd(xf: &FourierTensor, k: usize) -> Result<SliceSvd> {
    let m = xf.slice_matrix(k);
    if is_self_conjugate(k, xf.dims().n3) {
        svd::complex_svd(m.map(|z| Complex64::new(z.re, 0.0)), k)
    } else {
        svd::complex_svd(m, k)
    }
}

/// Applies `f` to the independent Fourier slices and fills the rest by
/// conjugation. `f` returns the new slice, which may change its shape.
pub(crate) fn map_fourier_slices(
    xf: &FourierTensor,
    out_rows: usize,
    out_cols: usize,
    mut f: impl FnMut(usize, &FourierTensor) -> Result<DMatrix<Complex64>>,
) -> Result<FourierTensor> {
    let n3 = xf.dims().n3;
    let mut out = FourierTensor::zeros((out_rows, out_cols, n3))?;
    for k in 0..independent_slices(n3) {
        let mut m = f(k, xf)?;
        if is_self_conjugate(k, n3) {
            m.iter_mut().for_each(|z| z.im = 0.0);
        }
        out.set_slice_pair(k, &m);
    }
    Ok(out)
}

/// t-product `a * b` for `a: n1 x n2 x n3`, `b: n2 x n4 x n3`.
pub fn t_product(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (da, db) = (a.dims(), b.dims());
    if da.n2 != db.n1 || da.n3 != db.n3 {
        return Err(Error::DimensionMismatch { expected: Dims::new(da.n2, db.n2, da.n3), found: db });
    }
    let (af, bf) = (fft_mode3(a), fft_mode3(b));
    let cf = map_fourier_slices(&af, da.n1, db.n2, |k, af| Ok(af.slice_matrix(k) * bf.slice_matrix(k)))?;
    ifft_mode3(&cf)
}

/// Transposes every frontal slice and reverses the order of slices
/// `2..=n3` (1-based).
pub fn conj_transpose(a: &Tensor3) -> Tensor3 {
    let Dims { n1, n2, n3 } = a.dims();
    Tensor3::from_fn((n2, n1, n3), |i, j, k| a.get(j, i, conjugate_partner(k, n3))).expect("dims are nonzero")
}

/// First frontal slice `I_n`, all others zero.
pub fn identity_tensor(n: usize, n3: usize) -> Result<Tensor3> {
    Tensor3::from_fn((n, n, n3), |i, j, k| if k == 0 && i == j { 1.0 } else { 0.0 })
}

/// Extends orthonormal columns `q` (`n x l`) to a full unitary `n x n`.
fn complete_basis(q: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (n, l) = q.shape();
    if l >= n {
        return q.columns(0, n).into_owned();
    }
    let mut cols: Vec<nalgebra::DVector<Complex64>> = q.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = nalgebra::DVector::<Complex64>::zeros(n);
        v[e] = Complex64::new(1.0, 0.0);
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v.axpy(-proj, c, Complex64::new(1.0, 0.0));
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v.unscale(norm));
        }
    }
    DMatrix::from_columns(&cols)
}

/// t-SVD by slice-wise SVD in the Fourier domain.
pub fn t_svd(a: &Tensor3) -> Result<TSvdFactors> {
    let Dims { n1, n2, n3 } = a.dims();
    let af = fft_mode3(a);
    let mut uf = FourierTensor::zeros((n1, n1, n3))?;
    let mut sf = FourierTensor::zeros((n1, n2, n3))?;
    let mut vf = FourierTensor::zeros((n2, n2, n3))?;
    for k in 0..independent_slices(n3) {
        let svd = fourier_slice_svd(&af, k)?;
        let mut s = DMatrix::<Complex64>::zeros(n1, n2);
        for (i, &sig) in svd.sigma.iter().enumerate() {
            s[(i, i)] = Complex64::new(sig, 0.0);
        }
        uf.set_slice_pair(k, &complete_basis(&svd.u));
        vf.set_slice_pair(k, &complete_basis(&svd.v_h.adjoint()));
        sf.set_slice_pair(k, &s);
    }
    Ok(TSvdFactors { u: ifft_mode3(&uf)?, s: ifft_mode3(&sf)?, v: ifft_mode3(&vf)? })
}

/// Singular values of every Fourier slice, each sorted non-increasing.
pub fn fourier_singular_values(a: &Tensor3) -> Result<Vec<Vec<f64>>> {
    let n3 = a.dims().n3;
    let af = fft_mode3(a);
    let mut out = vec![Vec::new(); n3];
    for k in 0..independent_slices(n3) {
        let m = af.slice_matrix(k);
        let m = if is_self_conjugate(k, n3) { m.map(|z| Complex64::new(z.re, 0.0)) } else { m };
        let sv = svd::singular_values(m, k)?;
        out[conjugate_partner(k, n3)] = sv.clone();
        out[k] = sv;
    }
    Ok(out)
}

/// Default numerical-rank tolerance `max(n1, n2) * eps * sigma_max`.
pub fn default_rank_tol(dims: Dims, sigma_max: f64) -> f64 {
    dims.n1.max(dims.n2) as f64 * f64::EPSILON * sigma_max
}

/// Multi-rank: count of singular values above `tol` in each Fourier slice.
/// `None` selects [`default_rank_tol`].
pub fn multi_rank(a: &Tensor3, tol: Option<f64>) -> Result<MultiRank> {
    let sv = fourier_singular_values(a)?;
    let sigma_max = sv.iter().flat_map(|s| s.first().copied()).fold(0.0, f64::max);
    let tol = tol.unwrap_or_else(|| default_rank_tol(a.dims(), sigma_max));
    Ok(MultiRank { ranks: sv.iter().map(|s| s.iter().filter(|&&x| x > tol).count()).collect() })
}

pub fn tubal_rank(a: &Tensor3, tol: Option<f64>) -> Result<usize> {
    Ok(multi_rank(a, tol)?.tubal_rank())
}

/// Tensor nuclear norm: sum of all Fourier-slice singular values.
pub fn tnn(a: &Tensor3) -> Result<f64> {
    Ok(fourier_singular_values(a)?.iter().flatten().fold(0.0, |acc, s| acc + s))
}

/// Partial sum of the tensor nuclear norm: for each Fourier slice `k`, the
/// singular values after the `N_k` largest.
pub fn pstnn(a: &Tensor3, target: &RankTarget) -> Result<f64> {
    let n = target.resolve(a.dims())?;
    let sv = fourier_singular_values(a)?;
    // folds from +0.0 so an empty tail reads as 0, not -0
    Ok(sv.iter().zip(&n).flat_map(|(s, &nk)| s.iter().skip(nk)).fold(0.0, |acc, s| acc + s))
}

/// Block-diagonal matrix `diag(A^(1), ..., A^(n3))` of the Fourier slices.
pub fn block_diagonal(xf: &FourierTensor) -> DMatrix<Complex64> {
    let Dims { n1, n2, n3 } = xf.dims();
    let mut m = DMatrix::zeros(n1 * n3, n2 * n3);
    for k in 0..n3 {
        m.view_mut((k * n1, k * n2), (n1, n2)).copy_from(&xf.slice_matrix(k));
    }
    m
}
