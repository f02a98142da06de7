//! Measured errors of deterministic and randomized product formulas.
//!
//! Randomized errors follow the mixing lemma: with `M` sampled products
//! `U_m` of `r` independently ordered segments, `a = max_m ||V − U_m||`,
//! `b = ||V − (1/M) Σ_m U_m||` and the channel error is estimated by
//! `a² + 2b`. Deterministic errors are `2 ||V − S^r||`.

mod bench;
mod fit;
mod propagate;
mod search;

pub use bench::{
    aggregate, fits_from_rows, rows_to_csv, run_benchmark, run_benchmark_with_progress,
    summary_to_csv, BenchConfig, BenchEvent, BenchFailure, BenchReport, BenchRow, FitRecord,
    SummaryRow, CSV_HEADER,
};
pub use fit::{powerlaw_fit, PowerLawFit};
pub use propagate::{FirstOrderSampler, SegmentChoice, SegmentLayout, StageOp, StageOps};
pub use search::{min_passing_r, SearchOutcome, SEARCH_CAP};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{spectral_norm, top_singular_value, ComplexMatrix, LanczosOptions};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::{Cplx, Real};

/// Dimension from which randomized products are handled matrix-free.
pub const MATRIX_FREE_RANDOMIZED_DIM: usize = 256;
/// Dimension from which deterministic powers are handled matrix-free.
pub const MATRIX_FREE_DETERMINISTIC_DIM: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Det,
    Rand,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Det => "det",
            Variant::Rand => "rand",
        }
    }

    fn code(self) -> u64 {
        match self {
            Variant::Det => 0,
            Variant::Rand => 1,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" => Ok(Variant::Det),
            "rand" => Ok(Variant::Rand),
            _ => Err(invalid("variant", format!("`{s}` is not det or rand"))),
        }
    }
}

/// How spectral norms of products are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormMethod {
    /// Dense below the size thresholds above, matrix-free from them on.
    #[default]
    Auto,
    Dense,
    MatrixFree,
}

/// Monte Carlo settings for one error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MCConfig {
    /// Number of sampled products `M`.
    pub samples: usize,
    pub seed: u64,
    /// 1 or an even `2k`.
    pub order: usize,
    pub r: u64,
    pub t: f64,
    pub eps: f64,
    pub sampler: FirstOrderSampler,
}

impl MCConfig {
    pub fn new(order: usize, r: u64, t: f64, seed: u64) -> Self {
        Self { samples: 3, seed, order, r, t, eps: 1e-3, sampler: FirstOrderSampler::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(invalid("M", "need at least one sample"));
        }
        if self.r == 0 {
            return Err(invalid("r", "must be >= 1"));
        }
        if !(self.order == 1 || (self.order >= 2 && self.order % 2 == 0)) {
            return Err(invalid("order", format!("must be 1 or even, got {}", self.order)));
        }
        if !self.t.is_finite() {
            return Err(invalid("t", "must be finite"));
        }
        Ok(())
    }
}

/// Mixing-lemma error statistics of a randomized product formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorEstimate {
    /// `||V − mean_m U_m||`.
    pub b_est: f64,
    /// `max_m ||V − U_m||`.
    pub a_est: f64,
    /// Sample standard deviation of `||V − U_m||` over the `M` samples (0 for `M = 1`).
    pub std_dev: f64,
    /// `a² + 2b`.
    pub diamond: f64,
    pub samples: usize,
}

/// A Hamiltonian with its exact evolution `V = exp(−i t H)`, ready to
/// compare product formulas against.
#[derive(Clone, Debug)]
pub struct Simulator<'a, T> {
    ham: &'a Hamiltonian<T>,
    t: T,
    target: ComplexMatrix<T>,
    method: NormMethod,
    lanczos: LanczosOptions,
}

impl<'a, T: Real> Simulator<'a, T> {
    pub fn new(ham: &'a Hamiltonian<T>, t: T) -> Result<Self> {
        let target = ham.ideal_evolution(t)?;
        // Distances between unitaries are at most 2; once a matrix-free
        // estimate certifies at least 1 the formula is far from any useful
        // target, so the remaining digits are not worth the iterations.
        let lanczos = LanczosOptions { stop_above: 1.0, ..LanczosOptions::default() };
        Ok(Self { ham, t, target, method: NormMethod::Auto, lanczos })
    }

    pub fn with_method(mut self, method: NormMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_lanczos(mut self, opts: LanczosOptions) -> Self {
        self.lanczos = opts;
        self
    }

    pub fn hamiltonian(&self) -> &Hamiltonian<T> {
        self.ham
    }

    pub fn target(&self) -> &ComplexMatrix<T> {
        &self.target
    }

    fn matrix_free(&self, threshold: usize) -> bool {
        match self.method {
            NormMethod::Auto => self.ham.dim() >= threshold,
            NormMethod::Dense => false,
            NormMethod::MatrixFree => true,
        }
    }

    fn ops(&self, layout: &SegmentLayout, r: u64) -> Result<StageOps<T>> {
        StageOps::new(self.ham, layout, self.t / T::lit(r as f64))
    }

    /// Orderings of the `r` segments of sample `sample`, segment 1 first.
    /// Segment `s` draws from `rng_from_seed(derive_seed([seed, s, sample]))`.
    pub fn draw_segments(
        layout: &SegmentLayout,
        r: u64,
        seed: u64,
        sample: usize,
        sampler: FirstOrderSampler,
    ) -> Vec<SegmentChoice> {
        (1..=r)
            .map(|s| {
                let mut rng = rng_from_seed(derive_seed(&[seed, s, sample as u64]));
                layout.draw(&mut rng, sampler)
            })
            .collect()
    }

    /// Dense product for sample `sample` of the keyed stream `seed`.
    pub fn sample_matrix(&self, cfg: &MCConfig, sample: usize) -> Result<ComplexMatrix<T>> {
        cfg.validate()?;
        let layout = SegmentLayout::new(cfg.order, self.ham.len())?;
        let ops = self.ops(&layout, cfg.r)?;
        let choices = Self::draw_segments(&layout, cfg.r, cfg.seed, sample, cfg.sampler);
        Ok(ops.product_matrix(&layout, &choices))
    }

    /// `||V − S^r||` for the fixed ordering.
    pub fn deterministic_error(&self, order: usize, r: u64) -> Result<f64> {
        if r == 0 {
            return Err(invalid("r", "must be >= 1"));
        }
        let layout = SegmentLayout::new(order, self.ham.len())?;
        let ops = self.ops(&layout, r)?;
        if self.matrix_free(MATRIX_FREE_DETERMINISTIC_DIM) {
            let choices = vec![SegmentChoice::Identity; r as usize];
            self.distance_matrix_free(&ops, &layout, &[choices])
        } else {
            let s = ops.segment_matrix(&layout, &SegmentChoice::Identity);
            let diff = &self.target - &s.pow(r);
            Ok(spectral_norm(&diff)?.to_f64_lossy())
        }
    }

    /// Mixing-lemma estimate from `cfg.samples` sampled products.
    pub fn estimate_error(&self, cfg: &MCConfig) -> Result<ErrorEstimate> {
        cfg.validate()?;
        let layout = SegmentLayout::new(cfg.order, self.ham.len())?;
        let ops = self.ops(&layout, cfg.r)?;
        let draws: Vec<Vec<SegmentChoice>> = (0..cfg.samples)
            .map(|m| Self::draw_segments(&layout, cfg.r, cfg.seed, m, cfg.sampler))
            .collect();

        let (per_sample, b) = if self.matrix_free(MATRIX_FREE_RANDOMIZED_DIM) {
            let per_sample = draws
                .par_iter()
                .map(|d| self.distance_matrix_free(&ops, &layout, std::slice::from_ref(d)))
                .collect::<Result<Vec<f64>>>()?;
            let b = if cfg.samples == 1 {
                per_sample[0]
            } else {
                self.distance_matrix_free(&ops, &layout, &draws)?
            };
            (per_sample, b)
        } else {
            let mats: Vec<ComplexMatrix<T>> = draws
                .par_iter()
                .map(|d| ops.product_matrix(&layout, d))
                .collect();
            let per_sample = mats
                .iter()
                .map(|u| Ok(spectral_norm(&(&self.target - u))?.to_f64_lossy()))
                .collect::<Result<Vec<f64>>>()?;
            // Mean in sample order.
            let mut mean = ComplexMatrix::zeros(self.ham.dim());
            for u in &mats {
                mean = &mean + u;
            }
            let mean = mean.scale(Cplx::new(T::one() / T::count(mats.len()), T::zero()));
            (per_sample, spectral_norm(&(&self.target - &mean))?.to_f64_lossy())
        };
        let a = per_sample.iter().copied().fold(0.0, f64::max);
        Ok(ErrorEstimate {
            b_est: b,
            a_est: a,
            std_dev: sample_std(&per_sample),
            diamond: a * a + 2.0 * b,
            samples: cfg.samples,
        })
    }

    /// `||V − (1/K) Σ_k U_k||` without forming any `U_k`.
    fn distance_matrix_free(
        &self,
        ops: &StageOps<T>,
        layout: &SegmentLayout,
        products: &[Vec<SegmentChoice>],
    ) -> Result<f64> {
        let dim = self.ham.dim();
        let inv = T::one() / T::count(products.len());
        let apply = |v: &[Cplx<T>], adjoint: bool| -> Vec<Cplx<T>> {
            let mut acc = if adjoint { self.target.adjoint_matvec(v) } else { self.target.matvec(v) };
            for choices in products {
                let mut w = v.to_vec();
                if adjoint {
                    ops.apply_product_adjoint(layout, choices, &mut w, 1);
                } else {
                    ops.apply_product(layout, choices, &mut w, 1);
                }
                for (a, x) in acc.iter_mut().zip(&w) {
                    *a -= x.scale(inv);
                }
            }
            acc
        };
        let sigma = top_singular_value(dim, |v| apply(v, false), |v| apply(v, true), self.lanczos)?;
        Ok(sigma.to_f64_lossy())
    }

    /// Smallest `r` meeting `eps` for the given variant. Randomized rows use
    /// the mixing-lemma estimate with `samples` products; deterministic rows
    /// use `2 ||V − S^r||`.
    pub fn min_segments_empirical(
        &self,
        variant: Variant,
        order: usize,
        eps: f64,
        samples: usize,
        seed: u64,
        sampler: FirstOrderSampler,
    ) -> Result<SearchOutcome> {
        if !(eps > 0.0) {
            return Err(invalid("eps", "must be > 0"));
        }
        let t = self.t.to_f64_lossy();
        min_passing_r(eps, |r| match variant {
            Variant::Det => Ok(2.0 * self.deterministic_error(order, r)?),
            Variant::Rand => {
                let cfg = MCConfig { samples, seed, order, r, t, eps, sampler };
                Ok(self.estimate_error(&cfg)?.diamond)
            }
        })
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// One randomized product `S^(r) ... S^(1)` at `λ = −i t / r` with segment
/// orderings drawn in segment order from `rng`: forward/reverse for order 1,
/// a uniform permutation for order `2k`.
pub fn sample_product<T: Real>(
    ham: &Hamiltonian<T>,
    order: usize,
    r: u64,
    t: T,
    rng: &mut impl Rng,
) -> Result<ComplexMatrix<T>> {
    if r == 0 {
        return Err(invalid("r", "must be >= 1"));
    }
    let layout = SegmentLayout::new(order, ham.len())?;
    let ops = StageOps::new(ham, &layout, t / T::lit(r as f64))?;
    let choices: Vec<SegmentChoice> =
        (0..r).map(|_| layout.draw(rng, FirstOrderSampler::ForwardReverse)).collect();
    Ok(ops.product_matrix(&layout, &choices))
}

/// Deterministic product `S(−i t / r)^r` with the fixed ordering.
pub fn deterministic_product<T: Real>(
    ham: &Hamiltonian<T>,
    order: usize,
    r: u64,
    t: T,
) -> Result<ComplexMatrix<T>> {
    if r == 0 {
        return Err(invalid("r", "must be >= 1"));
    }
    let layout = SegmentLayout::new(order, ham.len())?;
    let ops = StageOps::new(ham, &layout, t / T::lit(r as f64))?;
    Ok(ops.segment_matrix(&layout, &SegmentChoice::Identity).pow(r))
}

/// Estimate for `ham` at `cfg`, building `V` on the fly.
pub fn estimate_error<T: Real>(ham: &Hamiltonian<T>, cfg: &MCConfig) -> Result<ErrorEstimate> {
    Simulator::new(ham, T::lit(cfg.t))?.estimate_error(cfg)
}
