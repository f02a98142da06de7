use serde::Serialize;

use crate::error::{invalid, Result};

/// `r ≈ c · n^alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub c: f64,
    pub alpha: f64,
}

impl PowerLawFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.c * n.powf(self.alpha)
    }
}

/// Ordinary least squares on `(ln n, ln r)`.
pub fn powerlaw_fit(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.iter().any(|&(n, r)| !(n > 0.0 && r > 0.0 && n.is_finite() && r.is_finite())) {
        return Err(invalid("points", "all n and r must be finite and positive"));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, r)| (n.ln(), r.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if logs.is_empty() || !(sxx > 1e-300) {
        return Err(invalid("points", "need at least two distinct n values"));
    }
    let alpha = sxy / sxx;
    Ok(PowerLawFit { c: (my - alpha * mx).exp(), alpha })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_law() {
        let pts: Vec<_> = (2..8).map(|n| (n as f64, 7.0 * (n as f64).powi(2))).collect();
        let f = powerlaw_fit(&pts).unwrap();
        assert!((f.c - 7.0).abs() < 1e-10 && (f.alpha - 2.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate() {
        assert!(powerlaw_fit(&[(3.0, 1.0), (3.0, 2.0)]).is_err());
        assert!(powerlaw_fit(&[]).is_err());
        assert!(powerlaw_fit(&[(1.0, 0.0), (2.0, 1.0)]).is_err());
    }
}
