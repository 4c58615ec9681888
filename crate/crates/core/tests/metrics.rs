mod common;

use common::*;
use tubal_core::metrics::*;
use tubal_core::synth::{derive_seed, gen_low_tubal_rank};
use tubal_core::Tensor3;

fn checkerboard() -> Tensor3 {
    Tensor3::from_fn((16, 16, 1), |i, j, _| if (i / 2 + j / 2) % 2 == 0 { 1.0 } else { 0.0 }).unwrap()
}

// 3x3 box blur with clamped borders
fn blur(t: &Tensor3) -> Tensor3 {
    let d = t.dims();
    Tensor3::from_fn(d.as_tuple(), |i, j, k| {
        let mut s = 0.0;
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                let ii = (i as i64 + di).clamp(0, d.n1 as i64 - 1) as usize;
                let jj = (j as i64 + dj).clamp(0, d.n2 as i64 - 1) as usize;
                s += t.get(ii, jj, k);
            }
        }
        s / 9.0
    })
    .unwrap()
}

/// SSIM from its definition: weighted local statistics under a 2-D Gaussian
/// window at every fully contained position, averaged.
fn direct_ssim(x: &Tensor3, y: &Tensor3, range: f64) -> f64 {
    let d = x.dims();
    let w = 11usize;
    let c = 5.0;
    let mut weights = vec![vec![0.0; w]; w];
    let mut total = 0.0;
    for (a, row) in weights.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let r2 = (a as f64 - c).powi(2) + (b as f64 - c).powi(2);
            *v = (-r2 / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    let (c1, c2) = ((0.01 * range).powi(2), (0.03 * range).powi(2));
    let mut acc = 0.0;
    for k in 0..d.n3 {
        let mut sum = 0.0;
        let mut count = 0;
        for i0 in 0..=d.n1 - w {
            for j0 in 0..=d.n2 - w {
                let (mut mx, mut my) = (0.0, 0.0);
                for a in 0..w {
                    for b in 0..w {
                        let g = weights[a][b] / total;
                        mx += g * x.get(i0 + a, j0 + b, k);
                        my += g * y.get(i0 + a, j0 + b, k);
                    }
                }
                let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
                for a in 0..w {
                    for b in 0..w {
                        let g = weights[a][b] / total;
                        let (dx, dy) = (x.get(i0 + a, j0 + b, k) - mx, y.get(i0 + a, j0 + b, k) - my);
                        vx += g * dx * dx;
                        vy += g * dy * dy;
                        cxy += g * dx * dy;
                    }
                }
                sum += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
        acc += sum / count as f64;
    }
    acc / d.n3 as f64
}

#[test]
fn ssim_matches_direct_formula() {
    let truth = checkerboard();
    let blurred = blur(&truth);
    let got = ssim(&blurred, &truth).unwrap();
    let want = direct_ssim(&blurred, &truth, 1.0);
    assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    assert!(got < 1.0 && got > 0.0);

    let mut r = rng(31);
    let a = gaussian_tensor(&mut r, (14, 12, 3));
    let b = &a + &gaussian_tensor(&mut r, (14, 12, 3)).scale(0.3);
    let want = direct_ssim(&b, &a, ssim_dynamic_range(&a));
    assert!((ssim(&b, &a).unwrap() - want).abs() < 1e-8);
}

#[test]
fn ssim_of_self_is_one_and_negation_is_negative() {
    let mut r = rng(32);
    let g = gaussian_tensor(&mut r, (12, 12, 2));
    assert_eq!(ssim(&g, &g).unwrap(), 1.0);
    // alternating signs keep every local mean near zero
    let a = Tensor3::from_fn((12, 12, 2), |i, j, k| if (i + j) % 2 == 0 { 1.0 + k as f64 } else { -1.0 - k as f64 }).unwrap();
    assert!(ssim(&a.scale(-1.0), &a).unwrap() < 0.0);
}

#[test]
fn psnr_and_rse_match_direct_sums() {
    let mut r = rng(33);
    let a = gaussian_tensor(&mut r, (6, 5, 4));
    let b = gaussian_tensor(&mut r, (6, 5, 4));
    let (mut sse, mut ref_sq, mut peak) = (0.0, 0.0, f64::MIN);
    for (x, y) in b.as_slice().iter().zip(a.as_slice()) {
        sse += (x - y) * (x - y);
        ref_sq += y * y;
        peak = peak.max(*y);
    }
    let want_psnr = 10.0 * (peak * peak / (sse / 120.0)).log10();
    assert!((psnr(&b, &a).unwrap().value().unwrap() - want_psnr).abs() < 1e-10);
    assert!((rse(&b, &a).unwrap() - sse / ref_sq).abs() < 1e-12);
}

#[test]
fn psnr_fixed_error_and_scale_consistency() {
    let truth = Tensor3::from_fn((5, 4, 3), |i, j, k| ((i + j + k) % 4) as f64 / 3.0).unwrap();
    assert_eq!(truth.max_entry(), 1.0);
    let y = truth.zip_map(&truth, |v, _| if v > 0.5 { v - 0.1 } else { v + 0.1 }).unwrap();
    let p = psnr(&y, &truth).unwrap().value().unwrap();
    assert!((p - 20.0).abs() < 1e-9, "{p}");
    for c in [0.5, 3.0, 1e3] {
        let q = psnr(&y.scale(c), &truth.scale(c)).unwrap().value().unwrap();
        assert!((p - q).abs() < 1e-9);
    }
    assert_eq!(psnr(&truth, &truth).unwrap(), Psnr::Infinite);
}

#[test]
fn success_flags_follow_threshold() {
    let a = gen_low_tubal_rank((6, 6, 3), 2, derive_seed(1, 2, 3)).unwrap();
    for (scale, expect) in [(0.0, true), (0.01, true), (0.1, false)] {
        let noisy = a.map(|v| v * (1.0 + scale));
        let e = rse(&noisy, &a).unwrap();
        assert_eq!(is_success(e, SUCCESS_RSE), e < 1e-3);
        assert_eq!(is_success(e, SUCCESS_RSE), expect);
    }
    assert!(!is_success(SUCCESS_RSE, SUCCESS_RSE));
}
