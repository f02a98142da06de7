//! Truncated power series in noncommuting letters `1..=L`.
//!
//! A word `m_1 m_2 ... m_s` stands for `λ^s H_{m_1} H_{m_2} ... H_{m_s}`, so a
//! schedule's product of exponentials expands into a [`FreeSeries`] without
//! reference to any concrete matrices. The coefficient type is generic:
//! `f64` in general, exact rationals when every stage coefficient is dyadic.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::{factorial, falling_factorial};
use crate::schedule::{check_permutation, FormulaSchedule};

/// Largest alphabet for which the `L!` permutations are enumerated.
pub const PERMUTATION_CAP: usize = 8;
/// Largest alphabet for [`order_error_norm`].
pub const ORDER_ERROR_CAP: usize = 6;
/// Largest truncation order accepted anywhere in this module.
pub const MAX_ORDER: usize = 6;

/// Series coefficient ring.
pub trait Coeff: Num + Signed + Clone + Debug + Send + Sync + 'static {
    /// Exact conversion of a stage coefficient, `None` if not representable.
    fn from_f64(x: f64) -> Option<Self>;
    fn from_count(n: u64) -> Self;
    /// `|self|` as a double.
    fn magnitude(&self) -> f64;
}

impl Coeff for f64 {
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Coeff for Ratio<i64> {
    /// Exact value of the double when it is `m / 2^e` with `e <= 62`.
    fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        let mut scaled = x;
        for e in 0..=62u32 {
            if scaled.fract() == 0.0 && scaled.abs() < 9.0e18 {
                return Some(Ratio::new(scaled as i64, 1i64 << e));
            }
            scaled *= 2.0;
        }
        None
    }

    fn from_count(n: u64) -> Self {
        Ratio::from_integer(n as i64)
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Sequence of letters in `1..=L`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Some letter occurs twice.
    pub fn is_degenerate(&self) -> bool {
        let mut seen = 0u64;
        for &m in &self.0 {
            let bit = 1u64 << (m % 64);
            if seen & bit != 0 {
                return true;
            }
            seen |= bit;
        }
        false
    }

    /// Packed key `Σ m_i (L+1)^{i-1}`; unique over all words on `L` letters.
    pub fn key(&self, letters: usize) -> u64 {
        self.0
            .iter()
            .rev()
            .fold(0u64, |acc, &m| acc * (letters as u64 + 1) + m as u64)
    }

    pub fn from_key(mut key: u64, letters: usize) -> Self {
        let base = letters as u64 + 1;
        let mut out = Vec::new();
        while key > 0 {
            out.push((key % base) as usize);
            key /= base;
        }
        Word(out)
    }
}

/// Coefficients of every word up to length `s_max`, stored densely per length.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeSeries<C> {
    letters: usize,
    s_max: usize,
    /// `levels[s][i]` is the coefficient of the length-`s` word whose letters
    /// minus one are the base-`L` digits of `i`, least significant first.
    levels: Vec<Vec<C>>,
}

impl<C: Coeff> FreeSeries<C> {
    pub fn zero(letters: usize, s_max: usize) -> Result<Self> {
        if letters == 0 {
            return Err(invalid("L", "alphabet must be nonempty"));
        }
        if s_max > MAX_ORDER {
            return Err(Error::EnumerationCap { size: s_max, cap: MAX_ORDER });
        }
        let levels = (0..=s_max).map(|s| vec![C::zero(); letters.pow(s as u32)]).collect();
        Ok(Self { letters, s_max, levels })
    }

    /// The series `1`.
    pub fn one(letters: usize, s_max: usize) -> Result<Self> {
        let mut out = Self::zero(letters, s_max)?;
        out.levels[0][0] = C::one();
        Ok(out)
    }

    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    fn index(&self, word: &[usize]) -> Option<usize> {
        if word.len() > self.s_max {
            return None;
        }
        let mut idx = 0;
        for &m in word.iter().rev() {
            if m == 0 || m > self.letters {
                return None;
            }
            idx = idx * self.letters + (m - 1);
        }
        Some(idx)
    }

    fn word_at(&self, s: usize, mut idx: usize) -> Word {
        let mut w = Vec::with_capacity(s);
        for _ in 0..s {
            w.push(idx % self.letters + 1);
            idx /= self.letters;
        }
        Word(w)
    }

    /// Coefficient of `word`; zero for words outside the truncation.
    pub fn coeff(&self, word: &[usize]) -> C {
        self.index(word)
            .map_or_else(C::zero, |i| self.levels[word.len()][i].clone())
    }

    pub fn set(&mut self, word: &[usize], value: C) -> Result<()> {
        let i = self
            .index(word)
            .ok_or_else(|| invalid("word", format!("{word:?} outside alphabet or truncation")))?;
        self.levels[word.len()][i] = value;
        Ok(())
    }

    /// All `(word, coefficient)` pairs of length `s`, in index order.
    pub fn terms_of_order(&self, s: usize) -> impl Iterator<Item = (Word, &C)> + '_ {
        self.levels
            .get(s)
            .into_iter()
            .flat_map(move |lvl| lvl.iter().enumerate().map(move |(i, c)| (self.word_at(s, i), c)))
    }

    /// Right-multiplies by the truncated `exp(q · letter)`.
    pub fn mul_exp(&mut self, letter: usize, q: &C) -> Result<()> {
        if letter == 0 || letter > self.letters {
            return Err(Error::TermOutOfRange { id: letter, len: self.letters });
        }
        let l = self.letters;
        // q^m / m! for m = 0..=s_max.
        let mut pows = vec![C::one()];
        for m in 1..=self.s_max {
            let prev = pows[m - 1].clone();
            pows.push(prev * q.clone() / C::from_count(m as u64));
        }
        // Longest words first so every update reads an unmodified source.
        for s in (0..self.s_max).rev() {
            let (low, high) = self.levels.split_at_mut(s + 1);
            let src = &low[s];
            let stride = l.pow(s as u32);
            for (i, c) in src.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut target = i;
                let mut place = stride;
                for (m, lvl) in high.iter_mut().enumerate() {
                    target += (letter - 1) * place;
                    place *= l;
                    lvl[target] = lvl[target].clone() + c.clone() * pows[m + 1].clone();
                }
            }
        }
        Ok(())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        let mut out = Self::zero(self.letters, self.s_max)?;
        for a in 0..=self.s_max {
            for b in 0..=(self.s_max - a) {
                let shift = self.letters.pow(a as u32);
                for (i, x) in self.levels[a].iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (j, y) in rhs.levels[b].iter().enumerate() {
                        let t = &mut out.levels[a + b][i + j * shift];
                        *t = t.clone() + x.clone() * y.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    fn check_compatible(&self, rhs: &Self) -> Result<()> {
        if self.letters != rhs.letters || self.s_max != rhs.s_max {
            return Err(invalid(
                "series",
                format!(
                    "shapes differ: (L={}, s_max={}) vs (L={}, s_max={})",
                    self.letters, self.s_max, rhs.letters, rhs.s_max
                ),
            ));
        }
        Ok(())
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(C, C) -> C) -> Result<Self> {
        self.check_compatible(rhs)?;
        let levels = self
            .levels
            .iter()
            .zip(&rhs.levels)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x.clone(), y.clone())).collect())
            .collect();
        Ok(Self { letters: self.letters, s_max: self.s_max, levels })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, f: &C) -> Self {
        let levels = self
            .levels
            .iter()
            .map(|lvl| lvl.iter().map(|x| x.clone() * f.clone()).collect())
            .collect();
        Self { letters: self.letters, s_max: self.s_max, levels }
    }

    /// Same series with each letter `m` replaced by `sigma(m)`.
    pub fn relabel(&self, sigma: &[usize]) -> Result<Self> {
        check_permutation(sigma, self.letters)?;
        let mut out = Self::zero(self.letters, self.s_max)?;
        for s in 0..=self.s_max {
            for (i, c) in self.levels[s].iter().enumerate() {
                let w = self.word_at(s, i);
                let mapped: Vec<usize> = w.0.iter().map(|&m| sigma[m - 1]).collect();
                let j = out.index(&mapped).expect("relabelled word in range");
                out.levels[s][j] = c.clone();
            }
        }
        Ok(out)
    }

    /// Order-`s` part split into `(nondegenerate, degenerate)` words.
    pub fn split_parts(&self, s: usize) -> Result<(Self, Self)> {
        if s > self.s_max {
            return Err(invalid("s", format!("order {s} exceeds truncation {}", self.s_max)));
        }
        let mut nondeg = Self::zero(self.letters, self.s_max)?;
        let mut deg = Self::zero(self.letters, self.s_max)?;
        for (i, c) in self.levels[s].iter().enumerate() {
            if self.word_at(s, i).is_degenerate() {
                deg.levels[s][i] = c.clone();
            } else {
                nondeg.levels[s][i] = c.clone();
            }
        }
        Ok((nondeg, deg))
    }

    /// `Σ_{|w| = s} |coeff_w|`.
    pub fn order_abs_sum(&self, s: usize) -> f64 {
        self.levels.get(s).map_or(0.0, |lvl| lvl.iter().map(C::magnitude).sum())
    }

    /// `max_w |coeff_w|` over all stored words.
    pub fn max_abs(&self) -> f64 {
        self.levels
            .iter()
            .flatten()
            .map(C::magnitude)
            .fold(0.0, f64::max)
    }
}

/// Expansion of a schedule's product of exponentials, first stage leftmost.
pub fn schedule_series<C: Coeff>(schedule: &FormulaSchedule, s_max: usize) -> Result<FreeSeries<C>> {
    let mut out = FreeSeries::one(schedule.num_terms(), s_max)?;
    for st in schedule.stages() {
        let q = C::from_f64(st.coeff).ok_or_else(|| {
            invalid("coeff", format!("{} is not exactly representable", st.coeff))
        })?;
        out.mul_exp(st.term_id, &q)?;
    }
    Ok(out)
}

/// Expansion of the `κ`-row product with exact row coefficients `q`.
pub fn rows_series<C: Coeff>(q: &[C], perms: &[Vec<usize>], s_max: usize) -> Result<FreeSeries<C>> {
    if q.is_empty() || q.len() != perms.len() {
        return Err(invalid("q", "need one coefficient per row and at least one row"));
    }
    let letters = perms[0].len();
    let mut out = FreeSeries::one(letters, s_max)?;
    for (qi, p) in q.iter().zip(perms) {
        check_permutation(p, letters)?;
        for &m in p {
            out.mul_exp(m, qi)?;
        }
    }
    Ok(out)
}

/// `exp(Σ_j letter_j)`: every word of length `s` has coefficient `1/s!`.
pub fn ideal_series<C: Coeff>(letters: usize, s_max: usize) -> Result<FreeSeries<C>> {
    let mut out = FreeSeries::zero(letters, s_max)?;
    let mut fact = C::one();
    for s in 0..=s_max {
        if s > 0 {
            fact = fact * C::from_count(s as u64);
        }
        let v = C::one() / fact.clone();
        out.levels[s].iter_mut().for_each(|c| *c = v.clone());
    }
    Ok(out)
}

/// Arithmetic mean, summed in the given order.
pub fn average_series<C: Coeff>(family: &[FreeSeries<C>]) -> Result<FreeSeries<C>> {
    let (first, rest) = family
        .split_first()
        .ok_or_else(|| invalid("schedules", "cannot average an empty family"))?;
    let mut acc = first.clone();
    for s in rest {
        acc = acc.add(s)?;
    }
    Ok(acc.scale(&(C::one() / C::from_count(family.len() as u64))))
}

/// All permutations of `1..=n` in lexicographic order.
pub fn lexicographic_permutations(n: usize) -> Result<Vec<Vec<usize>>> {
    if n > PERMUTATION_CAP {
        return Err(Error::EnumerationCap { size: n, cap: PERMUTATION_CAP });
    }
    let mut p: Vec<usize> = (1..=n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
            return Ok(out);
        };
        let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

/// `(1/L!) Σ_σ` of the series with letters relabelled by `σ`, enumerated
/// in lexicographic order.
pub fn permutation_average<C: Coeff>(series: &FreeSeries<C>) -> Result<FreeSeries<C>> {
    let perms = lexicographic_permutations(series.letters())?;
    let family = perms
        .iter()
        .map(|p| series.relabel(p))
        .collect::<Result<Vec<_>>>()?;
    average_series(&family)
}

/// Average of the expansions of every relabelled schedule `schedule ∘ σ`.
pub fn schedule_average<C: Coeff>(schedule: &FormulaSchedule, s_max: usize) -> Result<FreeSeries<C>> {
    let perms = lexicographic_permutations(schedule.num_terms())?;
    let family = perms
        .iter()
        .map(|p| schedule_series(&schedule.relabel(p)?, s_max))
        .collect::<Result<Vec<_>>>()?;
    average_series(&family)
}

/// Averaged order-`2k` formula over all orderings of `L` summands.
pub fn suzuki_average(letters: usize, k: usize, s_max: usize) -> Result<FreeSeries<f64>> {
    let id: Vec<usize> = (1..=letters).collect();
    schedule_average(&FormulaSchedule::suzuki(letters, k, &id)?, s_max)
}

/// Outcome of one oracle check, serialised as `{lemma, parameters, max_deviation, pass}`.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub parameters: serde_json::Value,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Tolerance on coefficient identities checked in `f64`.
pub const COEFF_TOL: f64 = 1e-12;

/// Averages the `κ`-row product over all relabellings and compares every
/// nondegenerate order-`s` coefficient with `(q_1 + ... + q_κ)^s / s!`.
pub fn verify_randlemma<C: Coeff>(
    q: &[C],
    letters: usize,
    perms: &[Vec<usize>],
    s: usize,
) -> Result<LemmaReport> {
    if s == 0 || s > letters {
        return Err(invalid("s", format!("the lemma needs 1 <= s <= L, got s = {s}, L = {letters}")));
    }
    if letters > PERMUTATION_CAP {
        return Err(Error::EnumerationCap { size: letters, cap: PERMUTATION_CAP });
    }
    let base = rows_series(q, perms, s)?;
    let avg = permutation_average(&base)?;
    let sum_q = q.iter().fold(C::zero(), |a, b| a + b.clone());
    let mut want = C::one();
    for i in 1..=s {
        want = want * sum_q.clone() / C::from_count(i as u64);
    }
    let (nondeg, _) = avg.split_parts(s)?;
    let max_deviation = nondeg
        .terms_of_order(s)
        .filter(|(w, _)| !w.is_degenerate())
        .map(|(_, c)| (c.clone() - want.clone()).magnitude())
        .fold(0.0, f64::max);
    Ok(LemmaReport {
        lemma: "randomization".into(),
        parameters: serde_json::json!({
            "q": q.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>(),
            "kappa": q.len(),
            "L": letters,
            "s": s,
        }),
        max_deviation,
        pass: max_deviation <= COEFF_TOL,
    })
}

/// Largest nondegenerate order-`s` coefficient of `ideal − average S_2k`.
pub fn cancellation_report(letters: usize, k: usize, s: usize) -> Result<LemmaReport> {
    if s == 0 || s > letters {
        return Err(invalid("s", format!("needs 1 <= s <= L, got s = {s}, L = {letters}")));
    }
    let diff = ideal_series::<f64>(letters, s)?.sub(&suzuki_average(letters, k, s)?)?;
    let (nondeg, _) = diff.split_parts(s)?;
    let max_deviation = nondeg.max_abs();
    Ok(LemmaReport {
        lemma: "nondegenerate-cancellation".into(),
        parameters: serde_json::json!({ "L": letters, "k": k, "s": s }),
        max_deviation,
        pass: max_deviation <= COEFF_TOL,
    })
}

/// Degenerate order-`s` norms of the ideal and averaged series next to their
/// closed-form caps `Λ^s/s! [L^s − L^(s)]` and `(κΛ)^s/s! [L^s − L^(s)]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DegenerateCheck {
    pub ideal: f64,
    pub ideal_bound: f64,
    pub average: f64,
    pub average_bound: f64,
}

impl DegenerateCheck {
    pub fn holds(&self) -> bool {
        let slack = |b: f64| 1e-12 * b.max(1.0);
        self.ideal <= self.ideal_bound + slack(self.ideal_bound)
            && self.average <= self.average_bound + slack(self.average_bound)
    }
}

pub fn degenerate_check(letters: usize, k: usize, s: usize, lam: f64) -> Result<DegenerateCheck> {
    let ideal = ideal_series::<f64>(letters, s)?;
    let avg = suzuki_average(letters, k, s)?;
    let kappa = 2.0 * 5f64.powi(k as i32 - 1);
    let gap = (letters as f64).powi(s as i32) - falling_factorial(letters, s);
    let scale = lam.powi(s as i32);
    Ok(DegenerateCheck {
        ideal: ideal.split_parts(s)?.1.order_abs_sum(s) * scale,
        ideal_bound: scale / factorial(s) * gap,
        average: avg.split_parts(s)?.1.order_abs_sum(s) * scale,
        average_bound: (kappa * lam).powi(s as i32) / factorial(s) * gap,
    })
}

/// Order-`s` error of the averaged order-`2k` formula, measured by the
/// triangle inequality (`Σ_w |ideal_w − avg_w| Λ^s`), with the two closed-form caps.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrderError {
    pub exact: f64,
    /// `0` for `s <= 2k`; `2 c^s/s! [L^s − L^(s)]` for `2k < s <= L`; `2 c^s/s! L^s` above.
    pub refined_bound: f64,
    /// `0` for `s <= 2k`, else `c^s/(s−2)! L^{s−1}`.
    pub bound: f64,
}

impl OrderError {
    pub fn holds(&self) -> bool {
        let slack = 1e-12 * self.refined_bound.max(1.0);
        self.exact <= self.refined_bound + slack && self.refined_bound <= self.bound + slack
    }
}

/// Closed-form caps on the order-`s` error at `|λ| = 1`: `(refined, plain)`.
pub fn order_error_bounds(k: usize, letters: usize, s: usize, lam: f64) -> (f64, f64) {
    if s <= 2 * k {
        return (0.0, 0.0);
    }
    let c = 2.0 * 5f64.powi(k as i32 - 1) * lam;
    let l = letters as f64;
    let cs = c.powi(s as i32);
    let refined = if s <= letters {
        2.0 * cs / factorial(s) * (l.powi(s as i32) - falling_factorial(letters, s))
    } else {
        2.0 * cs / factorial(s) * l.powi(s as i32)
    };
    (refined, cs / factorial(s - 2) * l.powi(s as i32 - 1))
}

pub fn order_error_norm(k: usize, letters: usize, s: usize, lam: f64) -> Result<OrderError> {
    if letters > ORDER_ERROR_CAP {
        return Err(Error::EnumerationCap { size: letters, cap: ORDER_ERROR_CAP });
    }
    let diff = ideal_series::<f64>(letters, s)?.sub(&suzuki_average(letters, k, s)?)?;
    let (refined_bound, bound) = order_error_bounds(k, letters, s, lam);
    Ok(OrderError {
        exact: diff.order_abs_sum(s) * lam.powi(s as i32),
        refined_bound,
        bound,
    })
}
