use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_convergence, Recovery, RecoveryResult, SolverConfig};
use crate::error::{Error, Result};
use crate::prox::{pstnn_prox_tensor, ProxParams};
use crate::tensor::{Mask, Tensor3};

/// PSTNN tensor completion.
///
/// Minimises `||X||_PSTNN` subject to `X = O` on the observed set, via the
/// splitting `X = Y` with `Y` carrying the data constraint:
///
/// ```text
/// X <- prox(Y - M / beta), tau = 1 / beta
/// Y <- X + M / beta off the mask, O on the mask
/// M <- M + beta (X - Y)
/// ```
///
/// Unobserved entries start uniform on `[0, 1)` from `cfg.seed`. The
/// returned tensor is the final `Y`, so it matches `o` exactly on the mask.
pub fn complete(o: &Tensor3, mask: &Mask, cfg: &SolverConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    let dims = o.dims();
    if mask.dims() != dims {
        return Err(Error::DimensionMismatch { expected: dims, found: mask.dims() });
    }
    if mask.count() == 0 {
        return Err(Error::InvalidConfig("mask has no observed entries"));
    }
    o.ensure_finite()?;
    let params = ProxParams::new(1.0 / cfg.beta, cfg.target.clone())?;
    params.target.resolve_symmetric(dims)?;
    let beta = cfg.beta;
    let observed = mask.as_slice();
    let data = o.as_slice();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = Tensor3::zeros(dims)?;
    for (p, v) in x.as_mut_slice().iter_mut().enumerate() {
        *v = if observed[p] { data[p] } else { rng.random::<f64>() };
    }
    let mut y = x.clone();
    let mut m = Tensor3::zeros(dims)?;
    let mut trace = Vec::new();
    let mut converged = false;

    for iteration in 1..=cfg.max_iters {
        let input = y.zip_map(&m, |y, m| y - m / beta)?;
        let x_next = pstnn_prox_tensor(&input, &params)?;

        let mut y_next = x_next.zip_map(&m, |x, m| x + m / beta)?;
        for (p, v) in y_next.as_mut_slice().iter_mut().enumerate() {
            if observed[p] {
                *v = data[p];
            }
        }
        let m_next = {
            let mut m_next = m.clone();
            let (xs, ys) = (x_next.as_slice(), y_next.as_slice());
            for (p, v) in m_next.as_mut_slice().iter_mut().enumerate() {
                *v += beta * (xs[p] - ys[p]);
            }
            m_next
        };

        let (done, row) = check_convergence(iteration, (&x, &x_next), (&y, &y_next), (&x_next, &y_next), cfg.epsilon)?;
        trace.push(row);
        x = x_next;
        y = y_next;
        m = m_next;
        if done {
            converged = true;
            break;
        }
    }

    Ok(RecoveryResult { recovery: Recovery::Completed(y), iterations: trace.len(), trace, converged })
}
