//! Dense complex SVD (Golub-Kahan-Reinsch).
//!
//! Householder reflectors reduce the matrix to upper bidiagonal form, a
//! diagonal unitary scaling makes the bidiagonal real, and implicitly
//! shifted QR sweeps diagonalise it. Wide inputs are factorised through
//! their adjoint. Real inputs stay exactly real throughout.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_VALUE: usize = 75;

/// Thin SVD `m = u * diag(sigma) * v_h`, `sigma` non-increasing.
#[derive(Debug, Clone)]
pub struct SliceSvd {
    pub u: DMatrix<Complex64>,
    pub sigma: Vec<f64>,
    pub v_h: DMatrix<Complex64>,
}

/// Full thin SVD. `slice` only labels the error.
pub fn complex_svd(m: DMatrix<Complex64>, slice: usize) -> Result<SliceSvd> {
    let (rows, cols) = m.shape();
    if rows >= cols {
        let f = Gkr::run(rows, cols, m.as_slice().to_vec(), true).ok_or(Error::SvdFailure { slice })?;
        let u = DMatrix::from_vec(rows, cols, f.u);
        let v = DMatrix::from_vec(cols, cols, f.v);
        Ok(SliceSvd { u, sigma: f.sigma, v_h: v.adjoint() })
    } else {
        // m^H = U S V^H, so m = V S U^H
        let mh = m.adjoint();
        let f = Gkr::run(cols, rows, mh.as_slice().to_vec(), true).ok_or(Error::SvdFailure { slice })?;
        let u = DMatrix::from_vec(cols, rows, f.u);
        let v = DMatrix::from_vec(rows, rows, f.v);
        Ok(SliceSvd { u: v, sigma: f.sigma, v_h: u.adjoint() })
    }
}

/// Singular values only, non-increasing.
pub fn singular_values(m: DMatrix<Complex64>, slice: usize) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    let f = if rows >= cols {
        Gkr::run(rows, cols, m.as_slice().to_vec(), false)
    } else {
        Gkr::run(cols, rows, m.adjoint().as_slice().to_vec(), false)
    };
    Ok(f.ok_or(Error::SvdFailure { slice })?.sigma)
}

impl SliceSvd {
    /// `u * diag(weights) * v_h`, skipping trailing zero weights.
    pub fn recompose_with(&self, weights: &[f64]) -> DMatrix<Complex64> {
        let keep = weights.iter().rposition(|&w| w != 0.0).map_or(0, |p| p + 1);
        if keep == 0 {
            return DMatrix::zeros(self.u.nrows(), self.v_h.ncols());
        }
        let mut scaled = self.u.columns(0, keep).into_owned();
        for (j, &w) in weights[..keep].iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        scaled * self.v_h.rows(0, keep)
    }
}

struct Factors {
    u: Vec<Complex64>,
    sigma: Vec<f64>,
    v: Vec<Complex64>,
}

/// Hermitian reflector `I - scale * w w^H`.
struct Reflector {
    w: Vec<Complex64>,
    scale: f64,
}

/// Reflector taking `x` to `beta * e1`, or `None` when `x` is zero.
fn reflector(x: &[Complex64]) -> (Option<Reflector>, Complex64) {
    let norm = libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>());
    if norm == 0.0 {
        return (None, Complex64::new(0.0, 0.0));
    }
    let a0 = x[0].norm();
    let phase = if a0 == 0.0 { Complex64::new(1.0, 0.0) } else { x[0] / a0 };
    let beta = -phase * norm;
    let mut w = x.to_vec();
    w[0] -= beta;
    let wn2 = 2.0 * (norm * norm + norm * a0);
    (Some(Reflector { w, scale: 2.0 / wn2 }), beta)
}

impl Reflector {
    #[inline]
    fn apply(&self, y: &mut [Complex64]) {
        let s: Complex64 = self.w.iter().zip(y.iter()).map(|(w, y)| w.conj() * y).sum();
        let f = s * self.scale;
        for (yi, wi) in y.iter_mut().zip(&self.w) {
            *yi -= f * wi;
        }
    }
}

// columns p < q of a column-major matrix: (p, q) <- (p c + q s, q c - p s)
#[inline]
fn rotate(a: &mut [Complex64], rows: usize, p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let (head, tail) = a.split_at_mut(q * rows);
    let cp = &mut head[p * rows..(p + 1) * rows];
    let cq = &mut tail[..rows];
    for (y, z) in cp.iter_mut().zip(cq.iter_mut()) {
        let (yv, zv) = (*y, *z);
        *y = yv * c + zv * s;
        *z = zv * c - yv * s;
    }
}

/// Workspace for an `m x n` problem with `m >= n`, column-major.
struct Gkr {
    m: usize,
    n: usize,
    vectors: bool,
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

impl Gkr {
    fn run(m: usize, n: usize, mut a: Vec<Complex64>, vectors: bool) -> Option<Factors> {
        debug_assert!(m >= n && n > 0);
        let mut g = Gkr { m, n, vectors, u: Vec::new(), v: Vec::new() };
        let (mut d, mut e) = g.bidiagonalize(&mut a);
        g.make_real(&mut d, &mut e);
        let mut w: Vec<f64> = d.iter().map(|z| z.re).collect();
        // rv1[i] couples w[i - 1] and w[i]
        let mut rv1 = vec![0.0; n];
        for i in 1..n {
            rv1[i] = e[i - 1].re;
        }
        g.diagonalize(&mut w, &mut rv1)?;
        Some(g.sorted(w))
    }

    fn bidiagonalize(&mut self, a: &mut [Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let (m, n) = (self.m, self.n);
        let zero = Complex64::new(0.0, 0.0);
        let mut d = vec![zero; n];
        let mut e = vec![zero; n - 1];
        let mut lefts: Vec<Option<Reflector>> = Vec::with_capacity(n);
        let mut rights: Vec<Option<Reflector>> = Vec::with_capacity(n);
        let mut t = vec![zero; m];
        for k in 0..n {
            let (h, beta) = reflector(&a[k + m * k..m * (k + 1)]);
            if let Some(h) = &h {
                for j in k + 1..n {
                    h.apply(&mut a[k + m * j..m * (j + 1)]);
                }
            }
            d[k] = beta;
            lefts.push(h);

            if k + 1 == n {
                break;
            }
            if k + 2 == n {
                e[k] = a[k + m * (k + 1)];
                rights.push(None);
                continue;
            }
            // reflect row k from the right through its conjugate
            let row: Vec<Complex64> = (k + 1..n).map(|j| a[k + m * j].conj()).collect();
            let (g, beta) = reflector(&row);
            if let Some(g) = &g {
                let t = &mut t[..m - k - 1];
                t.iter_mut().for_each(|x| *x = zero);
                for (jj, zj) in g.w.iter().enumerate() {
                    let col = &a[m * (k + 1 + jj) + k + 1..m * (k + 2 + jj)];
                    for (ti, ai) in t.iter_mut().zip(col) {
                        *ti += ai * zj;
                    }
                }
                for (jj, zj) in g.w.iter().enumerate() {
                    let f = zj.conj() * g.scale;
                    let col = &mut a[m * (k + 1 + jj) + k + 1..m * (k + 2 + jj)];
                    for (ai, ti) in col.iter_mut().zip(t.iter()) {
                        *ai -= ti * f;
                    }
                }
            }
            e[k] = beta.conj();
            rights.push(g);
        }

        if self.vectors {
            let one = Complex64::new(1.0, 0.0);
            let mut u = vec![zero; m * n];
            for i in 0..n {
                u[i + m * i] = one;
            }
            for k in (0..n).rev() {
                if let Some(h) = &lefts[k] {
                    for j in k..n {
                        h.apply(&mut u[k + m * j..m * (j + 1)]);
                    }
                }
            }
            let mut v = vec![zero; n * n];
            for i in 0..n {
                v[i + n * i] = one;
            }
            for k in (0..rights.len()).rev() {
                if let Some(g) = &rights[k] {
                    for j in k + 1..n {
                        g.apply(&mut v[k + 1 + n * j..n * (j + 1)]);
                    }
                }
            }
            self.u = u;
            self.v = v;
        }
        (d, e)
    }

    /// Diagonal unitary scalings that leave `d` and `e` real and
    /// non-negative, folded into `u` and `v`.
    fn make_real(&mut self, d: &mut [Complex64], e: &mut [Complex64]) {
        let (m, n) = (self.m, self.n);
        for k in 0..n {
            let a = d[k].norm();
            if a > 0.0 {
                let s = d[k].conj() / a;
                d[k] = Complex64::new(a, 0.0);
                if k + 1 < n {
                    e[k] *= s;
                }
                if self.vectors {
                    let sc = s.conj();
                    self.u[m * k..m * (k + 1)].iter_mut().for_each(|z| *z *= sc);
                }
            }
            if k + 1 < n {
                let b = e[k].norm();
                if b > 0.0 {
                    let t = e[k].conj() / b;
                    e[k] = Complex64::new(b, 0.0);
                    d[k + 1] *= t;
                    if self.vectors {
                        self.v[n * (k + 1)..n * (k + 2)].iter_mut().for_each(|z| *z *= t);
                    }
                }
            }
        }
    }

    /// Implicit-shift QR on the real bidiagonal `(w, rv1)`.
    fn diagonalize(&mut self, w: &mut [f64], rv1: &mut [f64]) -> Option<()> {
        let (m, n) = (self.m, self.n);
        let anorm = (0..n).map(|i| w[i].abs() + rv1[i].abs()).fold(0.0, f64::max);
        let tol = f64::EPSILON * anorm;
        for k in (0..n).rev() {
            let mut its = 0;
            loop {
                // smallest l such that rv1[l] is negligible or w[l - 1] is
                let mut l = k;
                let mut cancel = true;
                loop {
                    if l == 0 || rv1[l].abs() <= tol {
                        cancel = false;
                        break;
                    }
                    if w[l - 1].abs() <= tol {
                        break;
                    }
                    l -= 1;
                }
                if cancel {
                    // w[l - 1] vanishes: chase rv1[l] away with left rotations
                    let nm = l - 1;
                    let (mut c, mut s) = (0.0, 1.0);
                    for i in l..=k {
                        let f = s * rv1[i];
                        rv1[i] *= c;
                        if f.abs() <= tol {
                            break;
                        }
                        let g = w[i];
                        let h = libm::hypot(f, g);
                        w[i] = h;
                        c = g / h;
                        s = -f / h;
                        if self.vectors {
                            rotate(&mut self.u, m, nm, i, c, s);
                        }
                    }
                }
                let z = w[k];
                if l == k {
                    if z < 0.0 {
                        w[k] = -z;
                        if self.vectors {
                            self.v[n * k..n * (k + 1)].iter_mut().for_each(|v| *v = -*v);
                        }
                    }
                    break;
                }
                its += 1;
                if its > MAX_SWEEPS_PER_VALUE {
                    return None;
                }
                // shift from the trailing 2x2 block
                let mut x = w[l];
                let nm = k - 1;
                let mut y = w[nm];
                let mut g = rv1[nm];
                let mut h = rv1[k];
                let mut f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
                g = libm::hypot(f, 1.0);
                let sg = if f >= 0.0 { g } else { -g };
                f = ((x - z) * (x + z) + h * ((y / (f + sg)) - h)) / x;
                let (mut c, mut s) = (1.0, 1.0);
                for j in l..=nm {
                    let i = j + 1;
                    g = rv1[i];
                    y = w[i];
                    h = s * g;
                    g *= c;
                    let mut zz = libm::hypot(f, h);
                    rv1[j] = zz;
                    c = f / zz;
                    s = h / zz;
                    f = x * c + g * s;
                    g = g * c - x * s;
                    h = y * s;
                    y *= c;
                    if self.vectors {
                        rotate(&mut self.v, n, j, i, c, s);
                    }
                    zz = libm::hypot(f, h);
                    w[j] = zz;
                    if zz != 0.0 {
                        c = f / zz;
                        s = h / zz;
                    }
                    f = c * g + s * y;
                    x = c * y - s * g;
                    if self.vectors {
                        rotate(&mut self.u, m, j, i, c, s);
                    }
                }
                rv1[l] = 0.0;
                rv1[k] = f;
                w[k] = x;
            }
        }
        Some(())
    }

    fn sorted(self, w: Vec<f64>) -> Factors {
        let (m, n) = (self.m, self.n);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
        let sigma = order.iter().map(|&i| w[i]).collect();
        if !self.vectors {
            return Factors { u: Vec::new(), sigma, v: Vec::new() };
        }
        let mut u = Vec::with_capacity(m * n);
        let mut v = Vec::with_capacity(n * n);
        for &i in &order {
            u.extend_from_slice(&self.u[m * i..m * (i + 1)]);
            v.extend_from_slice(&self.v[n * i..n * (i + 1)]);
        }
        Factors { u, sigma, v }
    }
}
