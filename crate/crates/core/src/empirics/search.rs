//! Smallest `r` whose measured error meets a target.
//!
//! Errors are expensive to measure and decay like a power of `r`, so the
//! search uses the measurements themselves to pick the next probe: log-log
//! extrapolation while bracketing and log-log interpolation inside the
//! bracket, falling back to doubling and bisection whenever the model step
//! fails to shrink the interval fast enough. For a non-increasing error the
//! answer is the same as plain doubling plus bisection.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Segment counts above this are not attempted.
pub const SEARCH_CAP: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub r_min: u64,
    pub value: f64,
    /// Every `(r, error)` pair measured, ascending in `r`.
    pub evaluations: Vec<(u64, f64)>,
    /// A larger `r` was seen to give a larger error than a smaller failing one.
    pub non_monotone: bool,
}

struct Probe<F> {
    f: F,
    seen: BTreeMap<u64, f64>,
}

impl<F: FnMut(u64) -> Result<f64>> Probe<F> {
    fn at(&mut self, r: u64) -> Result<f64> {
        if let Some(&v) = self.seen.get(&r) {
            return Ok(v);
        }
        let v = (self.f)(r)?;
        self.seen.insert(r, v);
        Ok(v)
    }
}

/// `r` where the power law through `(r1, v1)` and `(r2, v2)` reaches `target`.
fn loglog_root(r1: u64, v1: f64, r2: u64, v2: f64, target: f64) -> Option<f64> {
    if !(v1 > 0.0 && v2 > 0.0 && target > 0.0) || r1 == r2 {
        return None;
    }
    let slope = (v2 / v1).ln() / (r2 as f64 / r1 as f64).ln();
    if !(slope < -0.25) || !slope.is_finite() {
        return None;
    }
    let root = (r1 as f64).ln() + (target / v1).ln() / slope;
    root.exp().is_finite().then(|| root.exp())
}

/// Finds the smallest `r >= 1` with `f(r) <= eps`, assuming `f` decreases.
pub fn min_passing_r<F>(eps: f64, f: F) -> Result<SearchOutcome>
where
    F: FnMut(u64) -> Result<f64>,
{
    let mut probe = Probe { f, seen: BTreeMap::new() };
    let mut non_monotone = false;

    // Bracketing: lo fails, hi passes.
    let mut lo = 0u64;
    let mut lo_val = f64::INFINITY;
    let mut hi = 1u64;
    let mut hi_val = probe.at(1)?;
    let mut prev_fail: Option<(u64, f64)> = None;
    while hi_val > eps {
        if hi_val > lo_val && lo_val < 0.5 {
            non_monotone = true;
        }
        let last = (hi, hi_val);
        lo = hi;
        lo_val = hi_val;
        let mut next = 2 * hi;
        // Only trust the model once the error has left the saturated regime.
        if let Some((r0, v0)) = prev_fail.filter(|&(_, v)| v < 0.5) {
            if let Some(root) = loglog_root(r0, v0, last.0, last.1, eps) {
                let guess = (root * 1.02).ceil() as u64;
                next = guess.clamp(hi + 1, 16 * hi);
            }
        }
        prev_fail = Some(last);
        if next > SEARCH_CAP {
            if hi >= SEARCH_CAP {
                return Err(Error::BracketCap { cap: SEARCH_CAP });
            }
            next = SEARCH_CAP;
        }
        hi = next;
        hi_val = probe.at(hi)?;
    }

    // Shrinking: keep f(lo) > eps >= f(hi).
    let mut widened = false;
    let mut bisect_only = false;
    let mut slow_steps = 0;
    while hi - lo > 1 {
        let width = hi - lo;
        let mid = lo + width / 2;
        let candidate = if lo == 0 || bisect_only || slow_steps >= 2 {
            mid
        } else {
            match loglog_root(lo, lo_val, hi, hi_val, eps) {
                Some(root) => (root.ceil() as u64).clamp(lo + 1, hi - 1),
                None => mid,
            }
        };
        let v = probe.at(candidate)?;
        if lo > 0 && v > lo_val {
            non_monotone = true;
            if widened {
                break;
            }
            // Retry once from a wider bracket using plain bisection.
            widened = true;
            bisect_only = true;
            lo /= 2;
            lo_val = if lo == 0 { f64::INFINITY } else { probe.at(lo)? };
            if lo_val <= eps {
                hi = lo;
                hi_val = lo_val;
                lo = 0;
                lo_val = f64::INFINITY;
            }
            continue;
        }
        if v <= eps {
            hi = candidate;
            hi_val = v;
        } else {
            lo = candidate;
            lo_val = v;
        }
        if hi - lo > width / 2 {
            slow_steps += 1;
        } else {
            slow_steps = 0;
        }
    }

    // Smallest verified-passing r among everything measured.
    let (r_min, value) = if non_monotone {
        probe
            .seen
            .iter()
            .find(|(_, &v)| v <= eps)
            .map(|(&r, &v)| (r, v))
            .unwrap_or((hi, hi_val))
    } else {
        (hi, hi_val)
    };
    Ok(SearchOutcome {
        r_min,
        value,
        evaluations: probe.seen.into_iter().collect(),
        non_monotone,
    })
}
