//! Reconstruction quality: PSNR, SSIM and relative squared error.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Success threshold on the relative squared error.
pub const SUCCESS_RSE: f64 = 1e-3;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Peak signal-to-noise ratio in dB; identical inputs have no finite PSNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    Infinite,
}

impl Psnr {
    pub fn value(self) -> Option<f64> {
        match self {
            Psnr::Finite(v) => Some(v),
            Psnr::Infinite => None,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Finite(v) => write!(f, "{v}"),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr: Psnr,
    pub ssim: f64,
    pub rse: f64,
}

impl MetricReport {
    pub fn compute(y: &Tensor3, y_true: &Tensor3) -> Result<Self> {
        Ok(Self { psnr: psnr(y, y_true)?, ssim: ssim(y, y_true)?, rse: rse(y, y_true)? })
    }
}

/// `10 log10(peak^2 / MSE)` with `peak = max(y_true)` and the MSE taken over
/// all `n1 n2 n3` entries.
pub fn psnr(y: &Tensor3, y_true: &Tensor3) -> Result<Psnr> {
    y.ensure_same_dims(y_true)?;
    if y_true.inf_norm() == 0.0 {
        return Err(Error::ZeroReference);
    }
    let sse: f64 = y.as_slice().iter().zip(y_true.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    if sse == 0.0 {
        return Ok(Psnr::Infinite);
    }
    let mse = sse / y.dims().len() as f64;
    let peak = y_true.max_entry();
    Ok(Psnr::Finite(10.0 * libm::log10(peak * peak / mse)))
}

/// `||y - y_true||_F^2 / ||y_true||_F^2`.
pub fn rse(y: &Tensor3, y_true: &Tensor3) -> Result<f64> {
    y.ensure_same_dims(y_true)?;
    let den = y_true.fro_norm_sq();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num: f64 = y.as_slice().iter().zip(y_true.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(num / den)
}

/// Recovery counts as a success when `rse < threshold`.
#[inline]
pub fn is_success(rse: f64, threshold: f64) -> bool {
    rse < threshold
}

/// Normalised 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    let mut g: Vec<f64> = (0..size).map(|i| libm::exp(-(i as f64 - c) * (i as f64 - c) / (2.0 * sigma * sigma))).collect();
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= s);
    g
}

/// Window edge used for an `n1 x n2` slice: 11, or the largest odd size
/// that fits when a side is shorter.
pub fn ssim_window_size(n1: usize, n2: usize) -> usize {
    let m = n1.min(n2).min(SSIM_WINDOW);
    if m.is_multiple_of(2) {
        m - 1
    } else {
        m
    }
}

/// Dynamic range for SSIM: the peak of the reference, or its largest
/// magnitude when the peak is not positive, or 1 for a zero reference.
pub fn ssim_dynamic_range(y_true: &Tensor3) -> f64 {
    let peak = y_true.max_entry();
    if peak > 0.0 {
        peak
    } else if y_true.inf_norm() > 0.0 {
        y_true.inf_norm()
    } else {
        1.0
    }
}

// "valid" correlation of a column-major n1 x n2 image with taps x taps
fn filter_valid(img: &[f64], n1: usize, n2: usize, taps: &[f64]) -> Vec<f64> {
    let w = taps.len();
    let (r1, r2) = (n1 - w + 1, n2 - w + 1);
    // along columns (index i) first
    let mut tmp = vec![0.0; r1 * n2];
    for j in 0..n2 {
        for i in 0..r1 {
            tmp[i + r1 * j] = taps.iter().enumerate().map(|(t, g)| g * img[i + t + n1 * j]).sum();
        }
    }
    let mut out = vec![0.0; r1 * r2];
    for j in 0..r2 {
        for i in 0..r1 {
            out[i + r1 * j] = taps.iter().enumerate().map(|(t, g)| g * tmp[i + r1 * (j + t)]).sum();
        }
    }
    out
}

fn ssim_slice(x: &[f64], y: &[f64], n1: usize, n2: usize, taps: &[f64], range: f64) -> f64 {
    let c1 = (SSIM_K1 * range) * (SSIM_K1 * range);
    let c2 = (SSIM_K2 * range) * (SSIM_K2 * range);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let mx = filter_valid(x, n1, n2, taps);
    let my = filter_valid(y, n1, n2, taps);
    let exx = filter_valid(&xx, n1, n2, taps);
    let eyy = filter_valid(&yy, n1, n2, taps);
    let exy = filter_valid(&xy, n1, n2, taps);
    let mut total = 0.0;
    for p in 0..mx.len() {
        let (ux, uy) = (mx[p], my[p]);
        let vx = exx[p] - ux * ux;
        let vy = eyy[p] - uy * uy;
        let cxy = exy[p] - ux * uy;
        total += ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    total / mx.len() as f64
}

/// Single-scale SSIM per frontal slice with an 11x11 Gaussian window
/// (sigma 1.5), `K1 = 0.01`, `K2 = 0.03`, dynamic range from `y_true`,
/// averaged over slices.
pub fn ssim(y: &Tensor3, y_true: &Tensor3) -> Result<f64> {
    y.ensure_same_dims(y_true)?;
    if y == y_true {
        return Ok(1.0);
    }
    let d = y.dims();
    let taps = gaussian_taps(ssim_window_size(d.n1, d.n2), SSIM_SIGMA);
    let range = ssim_dynamic_range(y_true);
    let total: f64 = (0..d.n3).map(|k| ssim_slice(y.frontal(k), y_true.frontal(k), d.n1, d.n2, &taps, range)).sum();
    Ok(total / d.n3 as f64)
}
