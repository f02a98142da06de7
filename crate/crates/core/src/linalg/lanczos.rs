//! Matrix-free largest singular value via Lanczos on `A†A`.
//!
//! Used when the operator is only available as a pair of matvec closures
//! (products of many exponentials at large dimension). Full
//! reorthogonalization keeps the Krylov basis numerically orthogonal.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::eigen::tridiagonal_eigvals;
use super::{dot, norm};
use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Relative change of the top Ritz value (two consecutive steps) at which to stop.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Return as soon as the estimate (a lower bound on the true value)
    /// reaches this level.
    pub stop_above: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 300,
            seed: 0x1a9c_2057,
            stop_above: f64::INFINITY,
        }
    }
}

/// Largest singular value of the operator `A` (`apply`) with adjoint `apply_adj`.
pub fn top_singular_value<T, F, G>(
    dim: usize,
    mut apply: F,
    mut apply_adj: G,
    opts: LanczosOptions,
) -> Result<T>
where
    T: Real,
    F: FnMut(&[Cplx<T>]) -> Vec<Cplx<T>>,
    G: FnMut(&[Cplx<T>]) -> Vec<Cplx<T>>,
{
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(opts.seed);
    let mut q: Vec<Cplx<T>> = (0..dim)
        .map(|_| Cplx::new(T::lit(rng.random::<f64>() - 0.5), T::lit(rng.random::<f64>() - 0.5)))
        .collect();
    let n0 = norm(&q);
    q.iter_mut().for_each(|x| *x = *x / n0);

    let tol = T::lit(opts.tol);
    let steps = opts.max_iter.min(dim);
    let mut basis: Vec<Vec<Cplx<T>>> = Vec::with_capacity(steps);
    let mut alphas: Vec<T> = Vec::with_capacity(steps);
    let mut betas: Vec<T> = Vec::with_capacity(steps);
    let mut prev_theta = T::zero();
    let mut stable = 0;

    for j in 0..steps {
        let mut w = apply_adj(&apply(&q));
        let a = dot(&q, &w).re;
        for (wi, &qi) in w.iter_mut().zip(&q) {
            *wi -= qi.scale(a);
        }
        if let (Some(&b), Some(qp)) = (betas.last(), basis.last()) {
            for (wi, &pi) in w.iter_mut().zip(qp.iter()) {
                *wi -= pi.scale(b);
            }
        }
        basis.push(q);
        alphas.push(a);
        // Full reorthogonalization (twice is enough).
        for _ in 0..2 {
            for v in &basis {
                let h = dot(v, &w);
                for (wi, &vi) in w.iter_mut().zip(v) {
                    *wi -= h * vi;
                }
            }
        }
        let b = norm(&w);
        let theta = tridiagonal_eigvals(&alphas, &betas)?
            .into_iter()
            .fold(T::zero(), |m, x| m.max(x));
        let scale = theta.abs().max(T::min_positive_value());
        if b <= T::epsilon() * scale * T::lit(16.0)
            || j + 1 == dim
            || theta >= T::lit(opts.stop_above * opts.stop_above)
        {
            return Ok(theta.max(T::zero()).sqrt());
        }
        if j > 0 && (theta - prev_theta).abs() <= tol * scale {
            stable += 1;
            if stable >= 2 {
                return Ok(theta.max(T::zero()).sqrt());
            }
        } else {
            stable = 0;
        }
        prev_theta = theta;
        betas.push(b);
        q = w.into_iter().map(|x| x / b).collect();
    }
    Err(Error::NoConvergence {
        what: "Lanczos singular value",
        iterations: steps,
    })
}
