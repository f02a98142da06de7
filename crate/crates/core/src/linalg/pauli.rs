//! In-place application of `exp(z P)` for a Pauli string `P`.
//!
//! `P` is given in symplectic form: `P|b⟩ = i^{#Y} (−1)^{|b ∧ z|} |b ⊕ x⟩`,
//! where `x` flips the X/Y sites and `z` marks the Z/Y sites. Since `P² = I`,
//! `exp(zP) = cosh(z) I + sinh(z) P`, so one application touches each row
//! pair `(b, b ⊕ x)` once.

use super::ComplexMatrix;
use crate::scalar::{c, cexp, czero, Cplx, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliRotation<T> {
    x_mask: usize,
    z_mask: usize,
    y_phase: Cplx<T>,
    alpha: Cplx<T>,
    beta: Cplx<T>,
}

impl<T: Real> PauliRotation<T> {
    /// `exp(z P)` for the Pauli string with the given masks and Y count.
    pub fn new(x_mask: usize, z_mask: usize, num_y: usize, z: Cplx<T>) -> Self {
        let y_phase = match num_y % 4 {
            0 => c(T::one(), T::zero()),
            1 => c(T::zero(), T::one()),
            2 => c(-T::one(), T::zero()),
            _ => c(T::zero(), -T::one()),
        };
        let half = T::lit(0.5);
        let ep = cexp(z);
        let em = cexp(-z);
        Self {
            x_mask,
            z_mask,
            y_phase,
            alpha: (ep + em) * half,
            beta: (ep - em) * half,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            alpha: self.alpha.conj(),
            beta: self.beta.conj(),
            ..*self
        }
    }

    #[inline]
    fn phase(&self, source: usize) -> Cplx<T> {
        if (source & self.z_mask).count_ones() % 2 == 0 {
            self.y_phase
        } else {
            -self.y_phase
        }
    }

    /// Left-multiplies a row-major block of `data.len() / row_len` rows.
    /// A column vector is the case `row_len == 1`.
    pub fn apply_rows(&self, data: &mut [Cplx<T>], row_len: usize) {
        let rows = data.len() / row_len;
        debug_assert_eq!(rows * row_len, data.len());
        debug_assert!(self.x_mask < rows.max(1) && self.z_mask < rows.max(1));
        let (alpha, beta) = (self.alpha, self.beta);
        if self.x_mask == 0 {
            for b in 0..rows {
                let f = alpha + beta * self.phase(b);
                for v in &mut data[b * row_len..(b + 1) * row_len] {
                    *v = *v * f;
                }
            }
            return;
        }
        let high = 1usize << (usize::BITS - 1 - self.x_mask.leading_zeros());
        if row_len == 1 {
            self.apply_vector(data, high);
            return;
        }
        for b in 0..rows {
            if b & high != 0 {
                continue;
            }
            let b2 = b ^ self.x_mask;
            // row b receives P[b, b2] = phase(b2); row b2 receives phase(b).
            let g1 = beta * self.phase(b2);
            let g2 = beta * self.phase(b);
            let (lo, hi) = data.split_at_mut(b2 * row_len);
            let r1 = &mut lo[b * row_len..(b + 1) * row_len];
            let r2 = &mut hi[..row_len];
            if alpha.im == T::zero() {
                let a = alpha.re;
                for (u, v) in r1.iter_mut().zip(r2.iter_mut()) {
                    let (x, y) = (*u, *v);
                    *u = x.scale(a) + g1 * y;
                    *v = y.scale(a) + g2 * x;
                }
            } else {
                for (u, v) in r1.iter_mut().zip(r2.iter_mut()) {
                    let (x, y) = (*u, *v);
                    *u = alpha * x + g1 * y;
                    *v = alpha * y + g2 * x;
                }
            }
        }
    }

    /// Pair representatives are the indices with the `high` bit clear.
    fn apply_vector(&self, data: &mut [Cplx<T>], high: usize) {
        let low = high - 1;
        let alpha = self.alpha;
        let pos = self.y_phase * self.beta;
        // parity(b2 & z) = parity(b & z) ^ parity(x & z)
        let flip = (self.x_mask & self.z_mask).count_ones() & 1;
        let pairs = data.len() / 2;
        if alpha.im == T::zero() && pos.re == T::zero() {
            // Real cosine, imaginary sine: the usual case for real time steps.
            let (a, s) = (alpha.re, pos.im);
            for i in 0..pairs {
                let b = ((i & !low) << 1) | (i & low);
                let b2 = b ^ self.x_mask;
                let p = (b & self.z_mask).count_ones() & 1;
                let s1 = if p ^ flip == 0 { s } else { -s };
                let s2 = if p == 0 { s } else { -s };
                let (x, y) = (data[b], data[b2]);
                data[b] = Cplx::new(a * x.re - s1 * y.im, a * x.im + s1 * y.re);
                data[b2] = Cplx::new(a * y.re - s2 * x.im, a * y.im + s2 * x.re);
            }
            return;
        }
        let neg = -pos;
        for i in 0..pairs {
            let b = ((i & !low) << 1) | (i & low);
            let b2 = b ^ self.x_mask;
            let p = (b & self.z_mask).count_ones() & 1;
            let g1 = if p ^ flip == 0 { pos } else { neg };
            let g2 = if p == 0 { pos } else { neg };
            let (x, y) = (data[b], data[b2]);
            data[b] = alpha * x + g1 * y;
            data[b2] = alpha * y + g2 * x;
        }
    }

    pub fn apply_matrix(&self, m: &mut ComplexMatrix<T>) {
        let d = m.dim();
        self.apply_rows(m.as_mut_slice(), d);
    }

    pub fn to_dense(&self, dim: usize) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::identity(dim);
        self.apply_matrix(&mut m);
        m
    }
}

impl<T: Real> Default for PauliRotation<T> {
    fn default() -> Self {
        Self {
            x_mask: 0,
            z_mask: 0,
            y_phase: c(T::one(), T::zero()),
            alpha: c(T::one(), T::zero()),
            beta: czero(),
        }
    }
}
