//! One-dimensional DFT of arbitrary length.
//!
//! Forward transforms are unscaled, inverse transforms carry `1/n`:
//! `X[k] = sum_t x[t] e^{-2 pi i k t / n}`.
//!
//! Short lengths use a direct summation against a precomputed twiddle
//! table. Longer power-of-two lengths use an iterative radix-2 kernel, and
//! every other length goes through Bluestein's chirp-z reduction onto a
//! power-of-two convolution.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Lengths below this are transformed by direct summation.
pub const DIRECT_LIMIT: usize = 64;

#[derive(Debug, Clone)]
enum Kernel {
    Direct,
    Radix2,
    Bluestein {
        // e^{-i pi t^2 / n}
        chirp: Vec<Complex64>,
        kernel_spectrum: Vec<Complex64>,
        inner: Box<Dft>,
    },
}

/// A reusable transform plan for one length.
#[derive(Debug, Clone)]
pub struct Dft {
    n: usize,
    // e^{-2 pi i t / n}, t in 0..n
    twiddles: Vec<Complex64>,
    kernel: Kernel,
}

fn unit(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

// e^{-2 pi i t / n}, exact at multiples of a quarter turn
fn twiddle(t: usize, n: usize) -> Complex64 {
    let t = t % n;
    if (4 * t).is_multiple_of(n) {
        return match 4 * t / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
    }
    unit(-2.0 * PI * t as f64 / n as f64)
}

impl Dft {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "transform length must be positive");
        let twiddles = (0..n).map(|t| twiddle(t, n)).collect();
        let kernel = if n < DIRECT_LIMIT {
            Kernel::Direct
        } else if n.is_power_of_two() {
            Kernel::Radix2
        } else {
            let m = (2 * n - 1).next_power_of_two();
            let chirp: Vec<Complex64> = (0..n)
                .map(|t| {
                    // t^2 mod 2n keeps the angle argument small
                    let q = ((t as u128 * t as u128) % (2 * n as u128)) as f64;
                    unit(-PI * q / n as f64)
                })
                .collect();
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            kernel[0] = chirp[0].conj();
            for t in 1..n {
                kernel[t] = chirp[t].conj();
                kernel[m - t] = chirp[t].conj();
            }
            let inner = Dft::new(m);
            inner.forward(&mut kernel);
            Kernel::Bluestein { chirp, kernel_spectrum: kernel, inner: Box::new(inner) }
        };
        Self { n, twiddles, kernel }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "buffer length must equal plan length");
        match &self.kernel {
            Kernel::Direct => self.direct(buf),
            Kernel::Radix2 => self.radix2(buf),
            Kernel::Bluestein { chirp, kernel_spectrum, inner } => {
                let m = kernel_spectrum.len();
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for t in 0..self.n {
                    work[t] = buf[t] * chirp[t];
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel_spectrum) {
                    *w *= k;
                }
                inner.inverse(&mut work);
                for t in 0..self.n {
                    buf[t] = work[t] * chirp[t];
                }
            }
        }
    }

    /// In-place inverse transform, scaled by `1/n`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }

    fn direct(&self, buf: &mut [Complex64]) {
        let n = self.n;
        if n == 1 {
            return;
        }
        let input: Vec<Complex64> = buf.to_vec();
        for (k, out) in buf.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for x in &input {
                acc += x * self.twiddles[idx];
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            *out = acc;
        }
    }

    fn radix2(&self, buf: &mut [Complex64]) {
        let n = self.n;
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for t in 0..len / 2 {
                    let w = self.twiddles[t * stride];
                    let a = buf[start + t];
                    let b = buf[start + t + len / 2] * w;
                    buf[start + t] = a + b;
                    buf[start + t + len / 2] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(t, v)| v * unit(-2.0 * PI * (k * t) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|t| Complex64::new(libm::sin(0.37 * t as f64 + 0.1), libm::cos(1.3 * t as f64) - 0.2))
            .collect()
    }

    #[test]
    fn two_point() {
        let plan = Dft::new(2);
        let mut buf = [Complex64::new(3.0, 0.0), Complex64::new(5.0, 0.0)];
        plan.forward(&mut buf);
        assert_eq!(buf, [Complex64::new(8.0, 0.0), Complex64::new(-2.0, 0.0)]);
    }

    #[test]
    fn all_kernels_match_summation() {
        for n in [1, 2, 3, 7, 20, 63, 64, 128, 65, 100, 150] {
            let x = signal(n);
            let expect = naive(&x);
            let mut got = x.clone();
            Dft::new(n).forward(&mut got);
            let scale = expect.iter().map(|v| v.norm()).fold(1.0, f64::max);
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-11 * scale, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        for n in [5, 64, 97] {
            let x = signal(n);
            let plan = Dft::new(n);
            let mut buf = x.clone();
            plan.forward(&mut buf);
            plan.inverse(&mut buf);
            for (a, b) in buf.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
