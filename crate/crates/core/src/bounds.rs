//! Closed-form error bounds for deterministic and randomized product
//! formulas, the segment counts they imply, and unit-constant asymptotic
//! gate-count models.
//!
//! All rigorous bounds are diamond-norm distances for the full `r`-segment
//! evolution. Spectral-norm bounds for deterministic formulas are doubled.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::{ln_factorial, Real};

/// Largest segment count the planner will try.
pub const SEGMENT_CAP: u64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Det1,
    Det2k,
    Rand1,
    Rand2k,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [BoundKind::Det1, BoundKind::Det2k, BoundKind::Rand1, BoundKind::Rand2k];

    pub fn is_first_order(self) -> bool {
        matches!(self, BoundKind::Det1 | BoundKind::Rand1)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Det1 => "det1",
            BoundKind::Det2k => "det2k",
            BoundKind::Rand1 => "rand1",
            BoundKind::Rand2k => "rand2k",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det1" => Ok(BoundKind::Det1),
            "det2k" => Ok(BoundKind::Det2k),
            "rand1" => Ok(BoundKind::Rand1),
            "rand2k" => Ok(BoundKind::Rand2k),
            _ => Err(invalid("kind", format!("`{s}` is not one of det1, det2k, rand1, rand2k"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParams<T> {
    /// `Λ = max_j ||H_j||`.
    pub lam: T,
    pub t: T,
    #[serde(rename = "L")]
    pub terms: usize,
    pub r: u64,
    /// Half-order; ignored by first-order kinds.
    pub k: usize,
    pub eps: T,
}

impl<T: Real> BoundParams<T> {
    pub fn validate(&self, kind: BoundKind) -> Result<()> {
        if !(self.lam > T::zero() && self.lam.is_finite()) {
            return Err(invalid("lam", "must be finite and > 0"));
        }
        if !self.t.is_finite() {
            return Err(invalid("t", "must be finite"));
        }
        if self.terms == 0 {
            return Err(invalid("L", "must be >= 1"));
        }
        if self.r == 0 {
            return Err(invalid("r", "must be >= 1"));
        }
        if !kind.is_first_order() && self.k == 0 {
            return Err(invalid("k", "must be >= 1 for order-2k bounds"));
        }
        if !(self.eps > T::zero() && self.eps.is_finite()) {
            return Err(invalid("eps", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// `|x|^κ / κ! · e^{|x|}`, an upper bound on `|Σ_{s≥κ} x^s/s!|`.
pub fn tail_bound<T: Real>(x_abs: T, kappa: usize) -> T {
    if kappa == 0 {
        return x_abs.exp();
    }
    if x_abs == T::zero() {
        return T::zero();
    }
    let direct = x_abs.powi(kappa as i32) / T::lit(crate::scalar::factorial(kappa)) * x_abs.exp();
    if direct.is_finite() {
        direct
    } else {
        (T::count(kappa) * x_abs.ln() - T::lit(ln_factorial(kappa)) + x_abs).exp()
    }
}

/// `2 · 5^{k-1}`, the number of full sweeps over the summands in `S_2k`.
pub fn sweeps(k: usize) -> f64 {
    2.0 * 5f64.powi(k as i32 - 1)
}

/// Evaluates the named closed-form bound; overflow yields `+∞`.
pub fn rigorous_bound<T: Real>(kind: BoundKind, p: &BoundParams<T>) -> Result<T> {
    p.validate(kind)?;
    let x = p.lam * p.t.abs() * T::count(p.terms);
    if x == T::zero() {
        return Ok(T::zero());
    }
    let r = T::lit(p.r as f64);
    let l = T::count(p.terms);
    let two = T::lit(2.0);
    let v = match kind {
        BoundKind::Det1 => {
            let y = x / r;
            two * r * y * y * y.exp()
        }
        BoundKind::Rand1 => {
            let y = x / r;
            x.powi(4) / r.powi(3) * (two * y).exp()
                + two * x.powi(3) / (T::lit(3.0) * r * r) * y.exp()
        }
        BoundKind::Det2k => {
            let k = p.k as i32;
            let y = T::lit(sweeps(p.k)) * x / r;
            let fact = T::lit(crate::scalar::factorial(2 * p.k + 1));
            two * r * (two * y.powi(2 * k + 1) / fact * y.exp())
        }
        BoundKind::Rand2k => {
            let k = p.k as i32;
            let c = T::lit(sweeps(p.k));
            let y = c * x / r;
            let f1 = T::lit(crate::scalar::factorial(2 * p.k + 1));
            let f2 = T::lit(crate::scalar::factorial(2 * p.k - 1));
            let first = T::lit(4.0) * (c * x).powi(4 * k + 2) / (f1 * f1 * r.powi(4 * k + 1))
                * (two * y).exp();
            let second = two * (c * p.lam * p.t.abs()).powi(2 * k + 1) * l.powi(2 * k)
                / (f2 * r.powi(2 * k))
                * y.exp();
            first + second
        }
    };
    Ok(if v.is_nan() { T::infinity() } else { v })
}

/// Smallest `r` meeting a target, with what it costs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanResult<T> {
    pub r_min: u64,
    /// Total number of elementary exponentials over all segments.
    pub exp_count: u64,
    pub bound_at_r: T,
}

/// Exponentials per segment: `L` for first order, `2 L 5^{k-1}` for order `2k`.
pub fn exponentials_per_segment(first_order: bool, terms: usize, k: usize) -> u64 {
    if first_order {
        terms as u64
    } else {
        2 * terms as u64 * 5u64.pow(k as u32 - 1)
    }
}

/// Smallest `r` with `rigorous_bound(kind, r) <= eps`, by doubling from
/// `r = 1` and then integer bisection. `p.r` is ignored.
pub fn min_segments<T: Real>(kind: BoundKind, p: &BoundParams<T>) -> Result<PlanResult<T>> {
    let at = |r: u64| rigorous_bound(kind, &BoundParams { r, ..*p });
    at(1)?;
    let (mut lo, mut hi) = (0u64, 1u64);
    let mut hi_val = at(1)?;
    while hi_val > p.eps {
        if hi >= SEGMENT_CAP {
            return Err(Error::BracketCap { cap: SEGMENT_CAP });
        }
        lo = hi;
        hi *= 2;
        hi_val = at(hi)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let v = at(mid)?;
        if v <= p.eps {
            hi = mid;
            hi_val = v;
        } else {
            lo = mid;
        }
    }
    Ok(PlanResult {
        r_min: hi,
        exp_count: hi.saturating_mul(exponentials_per_segment(kind.is_first_order(), p.terms, p.k)),
        bound_at_r: hi_val,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Det,
    Comm,
    Rand,
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" => Ok(CostKind::Det),
            "comm" => Ok(CostKind::Comm),
            "rand" => Ok(CostKind::Rand),
            _ => Err(invalid("kind", format!("`{s}` is not one of det, comm, rand"))),
        }
    }
}

/// Asymptotic gate counts with every hidden constant set to 1 and `t`
/// replaced by `Λ|t|`. `k = 0` selects the first-order formulas
/// (`t²L³/ε` deterministic, `t^1.5 L^2.5/ε^0.5` randomized). Only good for
/// comparing trends.
pub fn asymptotic_cost<T: Real>(kind: CostKind, lam: T, t: T, terms: usize, k: usize, eps: T) -> Result<T> {
    if !(lam > T::zero() && lam.is_finite()) {
        return Err(invalid("lam", "must be finite and > 0"));
    }
    if !(t.abs() > T::zero() && t.is_finite()) {
        return Err(invalid("t", "must be finite and nonzero"));
    }
    if terms == 0 {
        return Err(invalid("L", "must be >= 1"));
    }
    if !(eps > T::zero() && eps.is_finite()) {
        return Err(invalid("eps", "must be finite and > 0"));
    }
    let tau = lam * t.abs();
    let l = T::count(terms);
    let one = T::one();
    if k == 0 {
        return match kind {
            CostKind::Det => Ok(tau * tau * l.powi(3) / eps),
            CostKind::Rand => Ok(tau.powf(T::lit(1.5)) * l.powf(T::lit(2.5)) / eps.sqrt()),
            CostKind::Comm => Err(invalid("k", "the commutator model is defined for k >= 1")),
        };
    }
    let kk = T::count(k);
    let two_k = T::lit(2.0) * kk;
    let base = tau * l * l;
    let short = base * (tau / eps).powf(one / two_k);
    Ok(match kind {
        CostKind::Det => base * (tau * l / eps).powf(one / two_k),
        CostKind::Rand => (base * (tau * l / eps).powf(one / (T::lit(4.0) * kk + one))).max(short),
        CostKind::Comm => (base * (tau * l / eps).powf(one / (two_k + one))).max(short),
    })
}
