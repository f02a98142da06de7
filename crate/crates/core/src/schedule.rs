//! Product-formula schedules: ordered `(term, coefficient)` stages whose
//! product `exp(q_1 λ H_{j_1}) exp(q_2 λ H_{j_2}) ...` approximates
//! `exp(λ Σ H_j)`. The first stage is the leftmost factor.

use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::hamiltonian::{term_matrix, Hamiltonian};
use crate::linalg::{herm_exp, product_chain, ComplexMatrix};
use crate::scalar::{fmt_sig, Cplx, Real};

/// One exponential `exp(coeff · λ · H_term_id)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stage {
    pub term_id: usize,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulaSchedule {
    order: usize,
    num_terms: usize,
    stages: Vec<Stage>,
    permutation: Vec<usize>,
    reversed: bool,
    rows: usize,
}

/// Suzuki's `p_k = 1 / (4 - 4^{1/(2k-1)})`.
pub fn suzuki_p(k: usize) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2 * k - 1) as f64))
}

/// Checks that `sigma` is a permutation of `1..=len`.
pub fn check_permutation(sigma: &[usize], len: usize) -> Result<()> {
    if sigma.len() != len {
        return Err(invalid("sigma", format!("expected {len} entries, got {}", sigma.len())));
    }
    let mut seen = vec![false; len + 1];
    for &s in sigma {
        if s == 0 || s > len || std::mem::replace(&mut seen[s], true) {
            return Err(invalid("sigma", format!("not a permutation of 1..={len}")));
        }
    }
    Ok(())
}

fn identity_perm(len: usize) -> Vec<usize> {
    (1..=len).collect()
}

impl FormulaSchedule {
    /// `S_1` (forward, `H_1` leftmost) or `S_1^rev`.
    pub fn first_order(num_terms: usize, reversed: bool) -> Result<Self> {
        if num_terms == 0 {
            return Err(invalid("L", "need at least one term"));
        }
        let mut perm = identity_perm(num_terms);
        if reversed {
            perm.reverse();
        }
        let mut s = Self::first_order_permuted(&perm)?;
        s.permutation = identity_perm(num_terms);
        s.reversed = reversed;
        Ok(s)
    }

    /// First-order product in the order `sigma(1), ..., sigma(L)`.
    pub fn first_order_permuted(sigma: &[usize]) -> Result<Self> {
        if sigma.is_empty() {
            return Err(invalid("L", "need at least one term"));
        }
        check_permutation(sigma, sigma.len())?;
        Ok(Self {
            order: 1,
            num_terms: sigma.len(),
            stages: sigma.iter().map(|&j| Stage { term_id: j, coeff: 1.0 }).collect(),
            permutation: sigma.to_vec(),
            reversed: false,
            rows: 1,
        })
    }

    /// Suzuki's order-`2k` formula with the summands relabelled by `sigma`.
    pub fn suzuki(num_terms: usize, k: usize, sigma: &[usize]) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k", "half-order must be at least 1"));
        }
        if num_terms == 0 {
            return Err(invalid("L", "need at least one term"));
        }
        check_permutation(sigma, num_terms)?;
        let stages = suzuki_stages(k, 1.0)
            .into_iter()
            .flat_map(|(coeff, forward)| {
                let row: Vec<Stage> = if forward {
                    sigma.iter().map(|&j| Stage { term_id: j, coeff }).collect()
                } else {
                    sigma.iter().rev().map(|&j| Stage { term_id: j, coeff }).collect()
                };
                row
            })
            .collect();
        Ok(Self {
            order: 2 * k,
            num_terms,
            stages,
            permutation: sigma.to_vec(),
            reversed: false,
            rows: 2 * 5usize.pow(k as u32 - 1),
        })
    }

    /// `κ` rows; row `i` is `exp(q_i λ H_{π_i(1)}) ... exp(q_i λ H_{π_i(L)})`.
    pub fn from_rows(q: &[f64], perms: &[Vec<usize>]) -> Result<Self> {
        if q.is_empty() || q.len() != perms.len() {
            return Err(invalid("q", "need one coefficient per row and at least one row"));
        }
        let num_terms = perms[0].len();
        let mut stages = Vec::with_capacity(q.len() * num_terms);
        for (&qi, p) in q.iter().zip(perms) {
            check_permutation(p, num_terms)?;
            stages.extend(p.iter().map(|&j| Stage { term_id: j, coeff: qi }));
        }
        Ok(Self {
            order: 1,
            num_terms,
            stages,
            permutation: identity_perm(num_terms),
            reversed: false,
            rows: q.len(),
        })
    }

    /// Same schedule with every term id `j` replaced by `sigma(j)`.
    pub fn relabel(&self, sigma: &[usize]) -> Result<Self> {
        check_permutation(sigma, self.num_terms)?;
        let mut out = self.clone();
        for st in &mut out.stages {
            st.term_id = sigma[st.term_id - 1];
        }
        out.permutation = self.permutation.iter().map(|&j| sigma[j - 1]).collect();
        Ok(out)
    }

    /// The rows `(q_i, π_i)`: each row is one sweep over all summands with a
    /// shared coefficient.
    pub fn row_decomposition(&self) -> (Vec<f64>, Vec<Vec<usize>>) {
        self.stages
            .chunks(self.num_terms)
            .map(|row| (row[0].coeff, row.iter().map(|st| st.term_id).collect()))
            .unzip()
    }

    /// Stage list read backwards.
    pub fn reversed_stages(&self) -> Self {
        let mut out = self.clone();
        out.stages.reverse();
        if self.order == 1 && self.rows == 1 {
            out.reversed = !self.reversed;
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of distinct summands `L`.
    pub fn num_terms(&self) -> usize {
        self.num_terms
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Number of complete permutation rows `κ`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Sum of coefficients per term id (index 0 is term 1).
    pub fn coefficient_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.num_terms];
        for st in &self.stages {
            sums[st.term_id - 1] += st.coeff;
        }
        sums
    }

    /// Debug dump: header then `position,term_id,coeff` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("position,term_id,coeff\n");
        for (i, st) in self.stages.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, st.term_id, fmt_sig(st.coeff, 17));
        }
        out
    }
}

/// Row layout of `S_2k(scale · λ)` as `(coefficient, forward?)` pairs, each row
/// covering all `L` summands once.
fn suzuki_stages(k: usize, scale: f64) -> Vec<(f64, bool)> {
    if k == 1 {
        return vec![(scale / 2.0, true), (scale / 2.0, false)];
    }
    let p = suzuki_p(k);
    let outer = suzuki_stages(k - 1, p * scale);
    let middle = suzuki_stages(k - 1, (1.0 - 4.0 * p) * scale);
    let mut out = Vec::with_capacity(5 * outer.len());
    out.extend_from_slice(&outer);
    out.extend_from_slice(&outer);
    out.extend_from_slice(&middle);
    out.extend_from_slice(&outer);
    out.extend_from_slice(&outer);
    out
}

/// Dense product `∏ exp(coeff · λ · H_term)` with the first stage leftmost.
pub fn materialize<T: Real>(
    schedule: &FormulaSchedule,
    ham: &Hamiltonian<T>,
    lambda: Cplx<T>,
) -> Result<ComplexMatrix<T>> {
    let mut mats = Vec::with_capacity(ham.len());
    for term in ham.terms() {
        mats.push(term_matrix(term, ham.n())?);
    }
    let factors = schedule
        .stages()
        .iter()
        .map(|st| {
            let m = ham.term(st.term_id).map(|t| &mats[t.id() - 1])?;
            herm_exp(m, lambda.scale(T::lit(st.coeff)))
        })
        .collect::<Result<Vec<_>>>()?;
    product_chain(&factors)
}
