//! Applying products of stage exponentials to vectors and matrices without
//! forming the segment unitaries.
//!
//! A segment is one pass of a formula with a chosen ordering. The full
//! evolution is `U = S^(r) ... S^(2) S^(1)`, so segment 1 acts first.

use rand::seq::SliceRandom;
use rand::RngCore;

use crate::error::{invalid, Result};
use crate::hamiltonian::{Hamiltonian, TermBody};
use crate::linalg::{ComplexMatrix, PauliRotation};
use crate::schedule::FormulaSchedule;
use crate::scalar::{c, czero, Cplx, Real};

/// How each randomized first-order segment is ordered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FirstOrderSampler {
    /// Forward or reversed with probability 1/2 each.
    #[default]
    ForwardReverse,
    /// Uniform permutation of all summands.
    FullPermutation,
}

/// Ordering used for one segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegmentChoice {
    /// Stages in their base order.
    Identity,
    /// Base stage list read backwards.
    Reversed,
    /// Term `j` replaced by `sigma[j - 1]`.
    Permuted(Vec<u32>),
}

/// Stage layout of one segment with the identity ordering, coefficients
/// interned so that stage operators can be cached per distinct value.
#[derive(Clone, Debug)]
pub struct SegmentLayout {
    order: usize,
    num_terms: usize,
    /// `(term_id, index into coeffs)` in product order (first is leftmost).
    stages: Vec<(u32, u32)>,
    coeffs: Vec<f64>,
}

impl SegmentLayout {
    /// `order` is 1 or an even `2k`.
    pub fn new(order: usize, num_terms: usize) -> Result<Self> {
        let schedule = match order {
            1 => FormulaSchedule::first_order(num_terms, false)?,
            o if o >= 2 && o % 2 == 0 => {
                let id: Vec<usize> = (1..=num_terms).collect();
                FormulaSchedule::suzuki(num_terms, o / 2, &id)?
            }
            o => return Err(invalid("order", format!("must be 1 or even, got {o}"))),
        };
        let mut coeffs: Vec<f64> = Vec::new();
        let stages = schedule
            .stages()
            .iter()
            .map(|st| {
                let idx = match coeffs.iter().position(|&q| q == st.coeff) {
                    Some(i) => i,
                    None => {
                        coeffs.push(st.coeff);
                        coeffs.len() - 1
                    }
                };
                (st.term_id as u32, idx as u32)
            })
            .collect();
        Ok(Self { order, num_terms, stages, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_terms(&self) -> usize {
        self.num_terms
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Draws the ordering of one randomized segment.
    pub fn draw(&self, rng: &mut impl RngCore, sampler: FirstOrderSampler) -> SegmentChoice {
        if self.order == 1 && sampler == FirstOrderSampler::ForwardReverse {
            if rng.next_u64() >> 63 == 0 {
                SegmentChoice::Identity
            } else {
                SegmentChoice::Reversed
            }
        } else {
            let mut sigma: Vec<u32> = (1..=self.num_terms as u32).collect();
            sigma.shuffle(rng);
            SegmentChoice::Permuted(sigma)
        }
    }
}

/// One elementary exponential ready to be applied.
#[derive(Clone, Debug)]
pub enum StageOp<T> {
    Pauli(PauliRotation<T>),
    Dense(ComplexMatrix<T>),
}

impl<T: Real> StageOp<T> {
    /// Left-multiplies a row-major block with `row_len` columns.
    pub fn apply(&self, data: &mut [Cplx<T>], row_len: usize) {
        match self {
            StageOp::Pauli(p) => p.apply_rows(data, row_len),
            StageOp::Dense(m) => {
                let d = m.dim();
                let mut out = vec![czero(); data.len()];
                for i in 0..d {
                    let orow = &mut out[i * row_len..(i + 1) * row_len];
                    for (k, &a) in m.row(i).iter().enumerate() {
                        if a == czero() {
                            continue;
                        }
                        for (o, &x) in orow.iter_mut().zip(&data[k * row_len..(k + 1) * row_len]) {
                            *o += a * x;
                        }
                    }
                }
                data.copy_from_slice(&out);
            }
        }
    }
}

/// Stage operators for every `(coefficient, term)` pair at a fixed `λ = −i t / r`.
#[derive(Clone, Debug)]
pub struct StageOps<T> {
    dim: usize,
    /// `fwd[c][j]` is `exp(coeffs[c] λ H_{j+1})`; `adj` holds the adjoints.
    fwd: Vec<Vec<StageOp<T>>>,
    adj: Vec<Vec<StageOp<T>>>,
}

impl<T: Real> StageOps<T> {
    pub fn new(ham: &Hamiltonian<T>, layout: &SegmentLayout, step: T) -> Result<Self> {
        if layout.num_terms != ham.len() {
            return Err(invalid("order", "layout and Hamiltonian disagree on L"));
        }
        let mut fwd = Vec::with_capacity(layout.coeffs.len());
        let mut adj = Vec::with_capacity(layout.coeffs.len());
        for &q in &layout.coeffs {
            let mut f = Vec::with_capacity(ham.len());
            let mut a = Vec::with_capacity(ham.len());
            for term in ham.terms() {
                // exp(q λ w B) with λ = −i step and body B scaled by w.
                let theta = T::lit(q) * step * term.coefficient();
                let z = c(T::zero(), -theta);
                match term.body() {
                    TermBody::Pauli(p) => {
                        let rot = p.rotation(ham.n(), z);
                        a.push(StageOp::Pauli(rot.adjoint()));
                        f.push(StageOp::Pauli(rot));
                    }
                    TermBody::Dense(d) => {
                        let m = d.eigen().exp(z);
                        a.push(StageOp::Dense(m.adjoint()));
                        f.push(StageOp::Dense(m));
                    }
                }
            }
            fwd.push(f);
            adj.push(a);
        }
        Ok(Self { dim: ham.dim(), fwd, adj })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn term_of(choice: &SegmentChoice, term: u32) -> usize {
        match choice {
            SegmentChoice::Permuted(sigma) => sigma[term as usize - 1] as usize,
            _ => term as usize,
        }
    }

    /// `X ← S X` for one segment.
    pub fn apply_segment(
        &self,
        layout: &SegmentLayout,
        choice: &SegmentChoice,
        data: &mut [Cplx<T>],
        row_len: usize,
    ) {
        // S = e_1 e_2 ... e_K, so e_K acts first; a reversed segment is
        // e_K ... e_1, so e_1 acts first.
        let mut run = |&(term, ci): &(u32, u32)| {
            self.fwd[ci as usize][Self::term_of(choice, term) - 1].apply(data, row_len);
        };
        if matches!(choice, SegmentChoice::Reversed) {
            layout.stages.iter().for_each(&mut run);
        } else {
            layout.stages.iter().rev().for_each(&mut run);
        }
    }

    /// `X ← S† X` for one segment.
    pub fn apply_segment_adjoint(
        &self,
        layout: &SegmentLayout,
        choice: &SegmentChoice,
        data: &mut [Cplx<T>],
        row_len: usize,
    ) {
        let mut run = |&(term, ci): &(u32, u32)| {
            self.adj[ci as usize][Self::term_of(choice, term) - 1].apply(data, row_len);
        };
        if matches!(choice, SegmentChoice::Reversed) {
            layout.stages.iter().rev().for_each(&mut run);
        } else {
            layout.stages.iter().for_each(&mut run);
        }
    }

    /// `X ← U X` with `U = S^(r) ... S^(1)`.
    pub fn apply_product(
        &self,
        layout: &SegmentLayout,
        choices: &[SegmentChoice],
        data: &mut [Cplx<T>],
        row_len: usize,
    ) {
        for ch in choices {
            self.apply_segment(layout, ch, data, row_len);
        }
    }

    /// `X ← U† X`.
    pub fn apply_product_adjoint(
        &self,
        layout: &SegmentLayout,
        choices: &[SegmentChoice],
        data: &mut [Cplx<T>],
        row_len: usize,
    ) {
        for ch in choices.iter().rev() {
            self.apply_segment_adjoint(layout, ch, data, row_len);
        }
    }

    /// Dense unitary of one segment.
    pub fn segment_matrix(&self, layout: &SegmentLayout, choice: &SegmentChoice) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::identity(self.dim);
        self.apply_segment(layout, choice, m.as_mut_slice(), self.dim);
        m
    }

    /// Dense unitary of the whole product.
    pub fn product_matrix(&self, layout: &SegmentLayout, choices: &[SegmentChoice]) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::identity(self.dim);
        self.apply_product(layout, choices, m.as_mut_slice(), self.dim);
        m
    }
}
