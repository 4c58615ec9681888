//! Reference implementations used as test oracles. None of them share code
//! with the library: the DFT is summed directly, the t-product is tube
//! convolution, and the SVD comes from Jacobi eigendecomposition of the
//! Hermitian dilation `[[0, A], [A^H, 0]]`.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tubal_core::Tensor3;

pub type C = Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_tensor(r: &mut ChaCha8Rng, dims: (usize, usize, usize)) -> Tensor3 {
    Tensor3::from_fn(dims, |_, _, _| r.sample(StandardNormal)).unwrap()
}

pub fn gaussian_matrix(r: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<C> {
    DMatrix::from_fn(m, n, |_, _| C::new(r.sample(StandardNormal), r.sample(StandardNormal)))
}

pub fn random_dims(r: &mut ChaCha8Rng, max: (usize, usize, usize)) -> (usize, usize, usize) {
    (r.random_range(1..=max.0), r.random_range(1..=max.1), r.random_range(1..=max.2))
}

/// `X[k] = sum_t x[t] e^{-2 pi i k t / n}`, summed directly.
pub fn naive_dft(x: &[C]) -> Vec<C> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| {
                    let a = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                    v * C::new(a.cos(), a.sin())
                })
                .sum()
        })
        .collect()
}

/// Fourier slices of a real tensor, by direct summation over each tube.
pub fn naive_fourier_slices(a: &Tensor3) -> Vec<DMatrix<C>> {
    let d = a.dims();
    let mut out = vec![DMatrix::zeros(d.n1, d.n2); d.n3];
    for i in 0..d.n1 {
        for j in 0..d.n2 {
            let tube: Vec<C> = a.tube(i, j).iter().map(|&v| C::new(v, 0.0)).collect();
            for (k, v) in naive_dft(&tube).into_iter().enumerate() {
                out[k][(i, j)] = v;
            }
        }
    }
    out
}

/// t-product by circular convolution of tubes.
pub fn conv_t_product(a: &Tensor3, b: &Tensor3) -> Tensor3 {
    let (da, db) = (a.dims(), b.dims());
    let n3 = da.n3;
    Tensor3::from_fn((da.n1, db.n2, n3), |i, j, k| {
        let mut s = 0.0;
        for l in 0..da.n2 {
            for t in 0..n3 {
                s += a.get(i, l, t) * b.get(l, j, (k + n3 - t) % n3);
            }
        }
        s
    })
    .unwrap()
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the unitary whose columns are eigenvectors.
pub fn hermitian_eigen(h: &DMatrix<C>) -> (Vec<f64>, DMatrix<C>) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = DMatrix::<C>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)].norm_sqr()).sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let h_pq = a[(p, q)];
                let mag = h_pq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // unitary diagonal similarity making a[p][q] real positive
                let ph = h_pq / mag;
                for k in 0..n {
                    a[(k, q)] *= ph.conj();
                    a[(q, k)] *= ph;
                    v[(k, q)] *= ph.conj();
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * c - y * s;
                    a[(k, q)] = x * s + y * c;
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * c - y * s;
                    v[(k, q)] = x * s + y * c;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = x * c - y * s;
                    a[(q, k)] = x * s + y * c;
                }
                a[(p, q)] = C::new(0.0, 0.0);
                a[(q, p)] = C::new(0.0, 0.0);
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// Reference SVD: `(u, sigma, v)` with `a = u diag(sigma) v^H`, sigma
/// non-increasing, `min(m, n)` columns.
pub struct OracleSvd {
    pub u: DMatrix<C>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<C>,
}

pub fn oracle_svd(a: &DMatrix<C>) -> OracleSvd {
    let (m, n) = a.shape();
    let l = m.min(n);
    let mut h = DMatrix::<C>::zeros(m + n, m + n);
    h.view_mut((0, m), (m, n)).copy_from(a);
    h.view_mut((m, 0), (n, m)).copy_from(&a.adjoint());
    let (vals, vecs) = hermitian_eigen(&h);
    let mut order: Vec<usize> = (0..m + n).collect();
    order.sort_by(|&x, &y| vals[y].total_cmp(&vals[x]));
    let top = &order[..l];
    let sigma: Vec<f64> = top.iter().map(|&i| vals[i].max(0.0)).collect();
    let mut u = DMatrix::zeros(m, l);
    let mut v = DMatrix::zeros(n, l);
    for (c, &i) in top.iter().enumerate() {
        let w = vecs.column(i);
        let s = std::f64::consts::SQRT_2;
        for r in 0..m {
            u[(r, c)] = w[r] * s;
        }
        for r in 0..n {
            v[(r, c)] = w[m + r] * s;
        }
    }
    OracleSvd { u, sigma, v }
}

pub fn oracle_singular_values(a: &DMatrix<C>) -> Vec<f64> {
    oracle_svd(a).sigma
}

/// Numerical rank from the oracle singular values.
pub fn oracle_rank(a: &DMatrix<C>, tol: f64) -> usize {
    oracle_singular_values(a).iter().filter(|&&s| s > tol).count()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest entry modulus.
pub fn cmax(m: &DMatrix<C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
