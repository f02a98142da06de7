//! Heisenberg benchmark: empirical segment counts for each `(n, order,
//! variant, instance)` and power laws fitted to their per-`n` means.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{powerlaw_fit, FirstOrderSampler, Simulator, Variant};
use crate::bounds::exponentials_per_segment;
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{Hamiltonian, DENSE_QUBIT_CAP};
use crate::rng::derive_seed;
use crate::scalar::fmt_sig;

pub const CSV_HEADER: &str = "n,order,variant,instance,seed,r_min,exp_count,error_at_rmin,wall_ms";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub n_set: Vec<usize>,
    /// 1 or even `2k`.
    pub orders: Vec<usize>,
    pub variants: Vec<Variant>,
    pub instances: usize,
    pub h: f64,
    /// Evolution time is `t_per_site · n`.
    pub t_per_site: f64,
    pub eps: f64,
    pub samples: usize,
    pub seed: u64,
    /// Record wall time per row; otherwise `wall_ms` is 0 so output stays reproducible.
    pub timings: bool,
    pub sampler: FirstOrderSampler,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_set: vec![6, 7, 8, 9, 10],
            orders: vec![4, 6],
            variants: vec![Variant::Det, Variant::Rand],
            instances: 5,
            h: 1.0,
            t_per_site: 1.0,
            eps: 1e-3,
            samples: 3,
            seed: 0,
            timings: false,
            sampler: FirstOrderSampler::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_set.is_empty() {
            return Err(invalid("n", "need at least one system size"));
        }
        for &n in &self.n_set {
            if !(3..=DENSE_QUBIT_CAP).contains(&n) {
                return Err(invalid("n", format!("{n} is outside 3..={DENSE_QUBIT_CAP}")));
            }
        }
        if self.orders.is_empty() {
            return Err(invalid("orders", "need at least one order"));
        }
        for &o in &self.orders {
            if !(o == 1 || (o >= 2 && o % 2 == 0 && o <= 2 * crate::freealg::MAX_ORDER)) {
                return Err(invalid("orders", format!("{o} is not 1 or an even order")));
            }
        }
        if self.variants.is_empty() {
            return Err(invalid("variant", "need at least one variant"));
        }
        if self.instances == 0 {
            return Err(invalid("instances", "must be >= 1"));
        }
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(invalid("h", "must be finite and >= 0"));
        }
        if !(self.t_per_site > 0.0 && self.t_per_site.is_finite()) {
            return Err(invalid("t", "must be finite and > 0"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(invalid("eps", "must be finite and > 0"));
        }
        if self.samples == 0 {
            return Err(invalid("M", "must be >= 1"));
        }
        Ok(())
    }

    pub fn instance_seed(&self, n: usize, instance: usize) -> u64 {
        derive_seed(&[self.seed, n as u64, instance as u64])
    }

    pub fn row_seed(&self, n: usize, order: usize, variant: Variant, instance: usize) -> u64 {
        derive_seed(&[self.seed, n as u64, order as u64, variant.code(), instance as u64])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub order: usize,
    pub variant: Variant,
    pub instance: usize,
    /// Seed of the Heisenberg field for this instance.
    pub seed: u64,
    pub r_min: u64,
    pub exp_count: u64,
    pub error_at_rmin: f64,
    pub wall_ms: u64,
    pub non_monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchFailure {
    pub n: usize,
    pub order: usize,
    pub variant: Variant,
    pub instance: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub n: usize,
    pub order: usize,
    pub variant: Variant,
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: u64,
    pub max: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRecord {
    pub order: usize,
    pub variant: Variant,
    pub c: f64,
    pub alpha: f64,
    pub n_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub failures: Vec<BenchFailure>,
    pub fits: Vec<FitRecord>,
}

/// Something finished: either a row or a failure.
#[derive(Clone, Debug)]
pub enum BenchEvent<'a> {
    Row(&'a BenchRow),
    Failure(&'a BenchFailure),
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    run_benchmark_with_progress(cfg, |_| {})
}

/// Runs every row, calling `progress` as each one completes (in completion
/// order, which may vary between runs; the report itself does not).
pub fn run_benchmark_with_progress<P>(cfg: &BenchConfig, progress: P) -> Result<BenchReport>
where
    P: Fn(BenchEvent<'_>) + Sync,
{
    cfg.validate()?;
    let groups: Vec<(usize, usize)> = cfg
        .n_set
        .iter()
        .flat_map(|&n| (0..cfg.instances).map(move |i| (n, i)))
        .collect();
    let tasks: Vec<(usize, Variant)> = cfg
        .orders
        .iter()
        .flat_map(|&o| cfg.variants.iter().map(move |&v| (o, v)))
        .collect();

    let results: Vec<std::result::Result<BenchRow, BenchFailure>> = groups
        .par_iter()
        .flat_map_iter(|&(n, instance)| {
            let seed = cfg.instance_seed(n, instance);
            let group = || -> Result<Vec<std::result::Result<BenchRow, BenchFailure>>> {
                let ham = Hamiltonian::<f64>::heisenberg(n, cfg.h, seed)?;
                let sim = Simulator::new(&ham, cfg.t_per_site * n as f64)?;
                Ok(tasks
                    .par_iter()
                    .map(|&(order, variant)| {
                        let res = run_row(cfg, &sim, n, order, variant, instance, seed);
                        match &res {
                            Ok(row) => progress(BenchEvent::Row(row)),
                            Err(f) => progress(BenchEvent::Failure(f)),
                        }
                        res
                    })
                    .collect())
            };
            group()
                .unwrap_or_else(|e| {
                    tasks
                        .iter()
                        .map(|&(order, variant)| {
                            let f = BenchFailure { n, order, variant, instance, error: e.to_string() };
                            progress(BenchEvent::Failure(&f));
                            Err(f)
                        })
                        .collect()
                })
                .into_iter()
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(f) => failures.push(f),
        }
    }
    rows.sort_by_key(|r| (r.n, r.order, r.variant, r.instance));
    failures.sort_by_key(|f| (f.n, f.order, f.variant, f.instance));
    let fits = fits_from_rows(&rows);
    Ok(BenchReport { rows, failures, fits })
}

fn run_row(
    cfg: &BenchConfig,
    sim: &Simulator<'_, f64>,
    n: usize,
    order: usize,
    variant: Variant,
    instance: usize,
    instance_seed: u64,
) -> std::result::Result<BenchRow, BenchFailure> {
    let start = Instant::now();
    let row_seed = cfg.row_seed(n, order, variant, instance);
    let fail = |e: Error| BenchFailure { n, order, variant, instance, error: e.to_string() };
    let outcome = sim
        .min_segments_empirical(variant, order, cfg.eps, cfg.samples, row_seed, cfg.sampler)
        .map_err(fail)?;
    let per_segment = exponentials_per_segment(order == 1, sim.hamiltonian().len(), order / 2);
    Ok(BenchRow {
        n,
        order,
        variant,
        instance,
        seed: instance_seed,
        r_min: outcome.r_min,
        exp_count: outcome.r_min.saturating_mul(per_segment),
        error_at_rmin: outcome.value,
        wall_ms: if cfg.timings { start.elapsed().as_millis() as u64 } else { 0 },
        non_monotone: outcome.non_monotone,
    })
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.order,
            r.variant,
            r.instance,
            r.seed,
            r.r_min,
            r.exp_count,
            fmt_sig(r.error_at_rmin, 10),
            r.wall_ms
        );
    }
    out
}

/// Mean, sample standard deviation, min and max of `r_min` per `(n, order, variant)`.
pub fn aggregate(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, usize, Variant), Vec<u64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.order, r.n, r.variant)).or_default().push(r.r_min);
    }
    let mut out: Vec<SummaryRow> = groups
        .into_iter()
        .map(|((order, n, variant), rs)| {
            let k = rs.len() as f64;
            let mean = rs.iter().map(|&x| x as f64).sum::<f64>() / k;
            let std_dev = if rs.len() > 1 {
                (rs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                n,
                order,
                variant,
                count: rs.len(),
                mean,
                std_dev,
                min: *rs.iter().min().unwrap(),
                max: *rs.iter().max().unwrap(),
            }
        })
        .collect();
    out.sort_by_key(|s| (s.n, s.order, s.variant));
    out
}

pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from("n,order,variant,count,mean_r_min,std_r_min,min_r_min,max_r_min\n");
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.n,
            s.order,
            s.variant,
            s.count,
            fmt_sig(s.mean, 10),
            fmt_sig(s.std_dev, 10),
            s.min,
            s.max
        );
    }
    out
}

/// Power laws per `(order, variant)` over per-`n` mean `r_min`; groups with
/// fewer than two distinct `n` are skipped.
pub fn fits_from_rows(rows: &[BenchRow]) -> Vec<FitRecord> {
    let mut by_key: BTreeMap<(usize, Variant), Vec<(f64, f64)>> = BTreeMap::new();
    for s in aggregate(rows) {
        by_key.entry((s.order, s.variant)).or_default().push((s.n as f64, s.mean));
    }
    by_key
        .into_iter()
        .filter_map(|((order, variant), pts)| {
            let fit = powerlaw_fit(&pts).ok()?;
            Some(FitRecord { order, variant, c: fit.c, alpha: fit.alpha, n_points: pts.len() })
        })
        .collect()
}
