use alloc::vec::Vec;

use super::{check_convergence, Recovery, RecoveryResult, SolverConfig};
use crate::error::Result;
use crate::prox::{pstnn_prox_tensor, shrink, ProxParams};
use crate::tensor::Tensor3;

/// PSTNN tensor robust PCA.
///
/// Minimises `||L||_PSTNN + lambda ||E||_1` subject to `O = L + E`:
///
/// ```text
/// L <- prox(O - E + M / beta), tau = 1 / beta
/// E <- shrink(O - L + M / beta, lambda / beta)
/// M <- M + beta (O - L - E)
/// ```
///
/// Starts from `L = O`, `E = M = 0`. `shrink` is signed soft-thresholding.
pub fn rpca(o: &Tensor3, cfg: &SolverConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    o.ensure_finite()?;
    let dims = o.dims();
    let params = ProxParams::new(1.0 / cfg.beta, cfg.target.clone())?;
    params.target.resolve_symmetric(dims)?;
    let beta = cfg.beta;
    let sparse_tau = cfg.lambda_for(dims) / beta;

    let mut l = o.clone();
    let mut e = Tensor3::zeros(dims)?;
    let mut m = Tensor3::zeros(dims)?;
    let mut trace = Vec::new();
    let mut converged = false;

    for iteration in 1..=cfg.max_iters {
        let mut input = o - &e;
        for (v, mv) in input.as_mut_slice().iter_mut().zip(m.as_slice()) {
            *v += mv / beta;
        }
        let l_next = pstnn_prox_tensor(&input, &params)?;

        let mut resid = o - &l_next;
        for (v, mv) in resid.as_mut_slice().iter_mut().zip(m.as_slice()) {
            *v += mv / beta;
        }
        let e_next = shrink(&resid, sparse_tau);

        let sum = &l_next + &e_next;
        let mut m_next = m;
        for ((v, ov), sv) in m_next.as_mut_slice().iter_mut().zip(o.as_slice()).zip(sum.as_slice()) {
            *v += beta * (ov - sv);
        }

        let (done, row) = check_convergence(iteration, (&l, &l_next), (&e, &e_next), (&sum, o), cfg.epsilon)?;
        trace.push(row);
        l = l_next;
        e = e_next;
        m = m_next;
        if done {
            converged = true;
            break;
        }
    }

    Ok(RecoveryResult {
        recovery: Recovery::Separated { low_rank: l, sparse: e },
        iterations: trace.len(),
        trace,
        converged,
    })
}
