use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, ColorChoice, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use randpf::bounds::{self, BoundKind, CostKind};
use randpf::empirics::{
    self, BenchConfig, BenchEvent, FirstOrderSampler, MCConfig, Simulator, Variant,
};
use randpf::freealg::{self, LemmaReport};
use randpf::scalar::fmt_sig;
use randpf::schedule::FormulaSchedule;
use randpf::{BoundParams, Error, Hamiltonian};

#[derive(Parser, Debug)]
#[command(name = "randpf", version, about = "Deterministic and randomized product-formula error bounds and benchmarks")]
struct Cli {
    /// Worker threads (default: all hardware threads).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format (default: csv for benchmark, json otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the main artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one closed-form diamond-norm bound.
    Bound(BoundArgs),
    /// Smallest r meeting eps under every bound, with asymptotic gate-count models.
    Plan(PlanArgs),
    /// Mixing-lemma error estimate for one randomized product on a Heisenberg chain.
    Empirical(EmpiricalArgs),
    /// Empirical minimal segment counts over Heisenberg instances, with power-law fits.
    Benchmark(BenchmarkArgs),
    /// Run the free-algebra lemma checks; exits 1 if any fails.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// Bound: det1, det2k, rand1 or rand2k.
    #[arg(long)]
    kind: BoundKind,
    #[command(flatten)]
    common: BoundCommon,
    /// Segments r.
    #[arg(long)]
    r: u64,
}

#[derive(Args, Debug)]
struct BoundCommon {
    /// Largest term norm Λ = max_j ||H_j|| (energy units).
    #[arg(long)]
    lam: f64,
    /// Evolution time (inverse energy units).
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// Number of summands L.
    #[arg(long = "L")]
    terms: usize,
    /// Half-order k of the order-2k formulas (ignored by first-order kinds).
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Target diamond-norm error.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
}

impl BoundCommon {
    fn params(&self, r: u64) -> BoundParams {
        BoundParams { lam: self.lam, t: self.t, terms: self.terms, r, k: self.k, eps: self.eps }
    }
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    common: BoundCommon,
}

#[derive(Args, Debug)]
struct EmpiricalArgs {
    /// Qubits n of the Heisenberg chain (L = 4n terms).
    #[arg(long)]
    n: usize,
    /// Field strength h; fields are uniform in [-h, h].
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Seed of the random fields.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Master seed of the segment orderings [default: same as --seed].
    #[arg(long)]
    sample_seed: Option<u64>,
    /// Formula order: 1 or an even 2k.
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Segments r.
    #[arg(long)]
    r: u64,
    /// Evolution time [default: n].
    #[arg(long)]
    t: Option<f64>,
    /// Sampled products M.
    #[arg(long = "M", default_value_t = 3)]
    samples: usize,
    /// First-order segment sampler.
    #[arg(long, value_enum, default_value_t = Sampler::ForwardReverse)]
    sampler: Sampler,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Sampler {
    ForwardReverse,
    Permutation,
}

impl From<Sampler> for FirstOrderSampler {
    fn from(s: Sampler) -> Self {
        match s {
            Sampler::ForwardReverse => FirstOrderSampler::ForwardReverse,
            Sampler::Permutation => FirstOrderSampler::FullPermutation,
        }
    }
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    /// Qubit counts, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [6usize, 7, 8, 9, 10])]
    n: Vec<usize>,
    /// Formula orders (1 or even), comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 6])]
    orders: Vec<usize>,
    /// Variants, comma separated.
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [VariantArg::Det, VariantArg::Rand])]
    variants: Vec<VariantArg>,
    /// Random instances per n.
    #[arg(long, default_value_t = 5)]
    instances: usize,
    /// Field strength h.
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Evolution time per qubit (t = this times n).
    #[arg(long, default_value_t = 1.0)]
    t_per_site: f64,
    /// Target diamond-norm error.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Sampled products M per randomized estimate.
    #[arg(long = "M", default_value_t = 3)]
    samples: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall time per row (otherwise wall_ms is 0).
    #[arg(long)]
    timings: bool,
    /// First-order segment sampler.
    #[arg(long, value_enum, default_value_t = Sampler::ForwardReverse)]
    sampler: Sampler,
    /// Power-law fits as JSON [default: next to --out as <stem>.fits.json].
    #[arg(long)]
    fit_out: Option<PathBuf>,
    /// Per-(n, order, variant) mean/std/min/max as CSV [default: next to --out as <stem>.summary.csv].
    #[arg(long)]
    summary_out: Option<PathBuf>,
    /// No progress lines on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Det,
    Rand,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Det => Variant::Det,
            VariantArg::Rand => Variant::Rand,
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Number of summands L (letters).
    #[arg(long = "L")]
    terms: usize,
    /// Half-order k of the Suzuki formula.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Largest word length s to check.
    #[arg(long, default_value_t = 3)]
    smax: usize,
    /// Term norm Λ used by the degenerate-part bounds.
    #[arg(long, default_value_t = 1.0)]
    lam: f64,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument { name, reason } => {
                Failure::Usage(format!("invalid value for --{name}: {reason}"))
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let color = if std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty()) {
        ColorChoice::Never
    } else {
        ColorChoice::Auto
    };
    let cli = match Cli::command_with_color(color).try_get_matches() {
        Ok(m) => match <Cli as clap::FromArgMatches>::from_arg_matches(&m) {
            Ok(cli) => cli,
            Err(e) => e.exit(),
        },
        Err(e) => e.exit(),
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: invalid value for --threads: must be >= 1");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

impl Cli {
    fn format(&self) -> Format {
        let default = match self.command {
            Command::Benchmark(_) => Format::Csv,
            _ => Format::Json,
        };
        self.format.unwrap_or(default)
    }

    fn command_with_color(color: ColorChoice) -> clap::Command {
        <Cli as clap::CommandFactory>::command().color(color)
    }
}

/// `Ok(false)` means the command ran but reported a failure.
fn run(cli: &Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Bound(a) => bound(cli, a),
        Command::Plan(a) => plan(cli, a),
        Command::Empirical(a) => empirical(cli, a),
        Command::Benchmark(a) => benchmark(cli, a),
        Command::Verify(a) => verify(cli, a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn num(x: f64) -> Value {
    // Fixed significant digits, kept numeric where JSON allows it.
    let s = fmt_sig(x, 10);
    s.parse::<serde_json::Number>().map(Value::Number).unwrap_or(Value::String(s))
}

fn params_json(p: &BoundParams) -> Value {
    json!({ "lam": num(p.lam), "t": num(p.t), "L": p.terms, "r": p.r, "k": p.k, "eps": num(p.eps) })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn bound(cli: &Cli, a: &BoundArgs) -> CliResult<bool> {
    let p = a.common.params(a.r);
    let value = bounds::rigorous_bound(a.kind, &p)?;
    let text = match cli.format() {
        Format::Json => pretty(&json!({ "kind": a.kind.as_str(), "params": params_json(&p), "value": num(value) })),
        Format::Csv => format!("kind,value\n{},{}\n", a.kind, fmt_sig(value, 10)),
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(true)
}

fn plan(cli: &Cli, a: &PlanArgs) -> CliResult<bool> {
    let c = &a.common;
    let base = c.params(1);
    let mut plans = Vec::new();
    for kind in BoundKind::ALL {
        let res = bounds::min_segments(kind, &base)?;
        plans.push((kind, res));
    }
    let mut costs = Vec::new();
    for kind in [CostKind::Det, CostKind::Comm, CostKind::Rand] {
        let cost = bounds::asymptotic_cost(kind, c.lam, c.t, c.terms, c.k, c.eps)?;
        costs.push((kind, cost));
    }
    let name = |k: CostKind| match k {
        CostKind::Det => "det",
        CostKind::Comm => "comm",
        CostKind::Rand => "rand",
    };
    let text = match cli.format() {
        Format::Json => {
            let rows: Vec<Value> = plans
                .iter()
                .map(|(kind, r)| {
                    json!({
                        "kind": kind.as_str(),
                        "params": params_json(&BoundParams { r: r.r_min, ..base }),
                        "r_min": r.r_min,
                        "exp_count": r.exp_count,
                        "bound_at_r": num(r.bound_at_r),
                    })
                })
                .collect();
            let models: Vec<Value> =
                costs.iter().map(|&(k, v)| json!({ "kind": name(k), "k": c.k, "cost": num(v) })).collect();
            pretty(&json!({ "bounds": rows, "asymptotic": models }))
        }
        Format::Csv => {
            let mut s = String::from("method,r_min,exp_count,value\n");
            for (kind, r) in &plans {
                s += &format!("{},{},{},{}\n", kind, r.r_min, r.exp_count, fmt_sig(r.bound_at_r, 10));
            }
            for &(k, v) in &costs {
                s += &format!("asymptotic_{},,,{}\n", name(k), fmt_sig(v, 10));
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(true)
}

fn empirical(cli: &Cli, a: &EmpiricalArgs) -> CliResult<bool> {
    let ham = Hamiltonian::heisenberg(a.n, a.h, a.seed)?;
    let t = a.t.unwrap_or(a.n as f64);
    let cfg = MCConfig {
        samples: a.samples,
        seed: a.sample_seed.unwrap_or(a.seed),
        order: a.order,
        r: a.r,
        t,
        eps: 1e-3,
        sampler: a.sampler.into(),
    };
    let sim = Simulator::new(&ham, t)?;
    let est = sim.estimate_error(&cfg)?;
    let text = match cli.format() {
        Format::Json => pretty(&json!({
            "n": a.n, "order": a.order, "r": a.r, "t": num(t), "M": a.samples, "seed": a.seed,
            "b_est": num(est.b_est), "a_est": num(est.a_est),
            "std_dev": num(est.std_dev), "diamond": num(est.diamond),
        })),
        Format::Csv => format!(
            "n,order,r,t,M,seed,b_est,a_est,std_dev,diamond\n{},{},{},{},{},{},{},{},{},{}\n",
            a.n,
            a.order,
            a.r,
            fmt_sig(t, 10),
            a.samples,
            a.seed,
            fmt_sig(est.b_est, 10),
            fmt_sig(est.a_est, 10),
            fmt_sig(est.std_dev, 10),
            fmt_sig(est.diamond, 10)
        ),
    };
    emit(cli.out.as_deref(), &text)?;
    Ok(true)
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn benchmark(cli: &Cli, a: &BenchmarkArgs) -> CliResult<bool> {
    let cfg = BenchConfig {
        n_set: a.n.clone(),
        orders: a.orders.clone(),
        variants: a.variants.iter().map(|&v| v.into()).collect(),
        instances: a.instances,
        h: a.h,
        t_per_site: a.t_per_site,
        eps: a.eps,
        samples: a.samples,
        seed: a.seed,
        timings: a.timings,
        sampler: a.sampler.into(),
    };
    cfg.validate()?;
    let quiet = a.quiet;
    let report = empirics::run_benchmark_with_progress(&cfg, |ev| {
        if quiet {
            return;
        }
        let line = match ev {
            BenchEvent::Row(r) => format!(
                "n={} order={} {} instance={} r_min={}",
                r.n, r.order, r.variant, r.instance, r.r_min
            ),
            BenchEvent::Failure(f) => format!(
                "n={} order={} {} instance={} failed: {}",
                f.n, f.order, f.variant, f.instance, f.error
            ),
        };
        let _ = writeln!(io::stderr().lock(), "{line}");
    })?;

    let fits = report.fits.iter().map(|f| {
        json!({ "order": f.order, "variant": f.variant.as_str(), "c": num(f.c), "alpha": num(f.alpha), "n_points": f.n_points })
    });
    let fits_text = pretty(&Value::Array(fits.collect()));
    let summary_text = empirics::summary_to_csv(&empirics::aggregate(&report.rows));
    let main_text = match cli.format() {
        Format::Csv => empirics::rows_to_csv(&report.rows),
        Format::Json => {
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n, "order": r.order, "variant": r.variant.as_str(), "instance": r.instance,
                        "seed": r.seed, "r_min": r.r_min, "exp_count": r.exp_count,
                        "error_at_rmin": num(r.error_at_rmin), "wall_ms": r.wall_ms,
                    })
                })
                .collect();
            pretty(&json!({ "rows": rows, "fits": serde_json::from_str::<Value>(&fits_text).unwrap() }))
        }
    };
    emit(cli.out.as_deref(), &main_text)?;

    let fit_path = a.fit_out.clone().or_else(|| cli.out.as_deref().map(|o| sibling(o, ".fits.json")));
    let summary_path = a.summary_out.clone().or_else(|| cli.out.as_deref().map(|o| sibling(o, ".summary.csv")));
    if let Some(p) = fit_path {
        fs::write(p, &fits_text)?;
    }
    if let Some(p) = summary_path {
        fs::write(p, &summary_text)?;
    }
    for f in &report.failures {
        eprintln!(
            "warning: n={} order={} {} instance={} produced no row: {}",
            f.n, f.order, f.variant, f.instance, f.error
        );
    }
    Ok(report.failures.is_empty())
}

fn verify(cli: &Cli, a: &VerifyArgs) -> CliResult<bool> {
    if a.terms == 0 {
        return Err(Failure::Usage("invalid value for --L: must be >= 1".into()));
    }
    if a.k == 0 || a.k > freealg::MAX_ORDER / 2 {
        return Err(Failure::Usage(format!("invalid value for --k: must be in 1..={}", freealg::MAX_ORDER / 2)));
    }
    if a.smax == 0 {
        return Err(Failure::Usage("invalid value for --smax: must be >= 1".into()));
    }
    if !(a.lam > 0.0 && a.lam.is_finite()) {
        return Err(Failure::Usage("invalid value for --lam: must be finite and > 0".into()));
    }
    let identity: Vec<usize> = (1..=a.terms).collect();
    let schedule = FormulaSchedule::suzuki(a.terms, a.k, &identity)?;
    let (q, perms) = schedule.row_decomposition();
    let mut reports: Vec<LemmaReport> = Vec::new();
    for s in 1..=a.smax.min(a.terms) {
        reports.push(freealg::verify_randlemma(&q, a.terms, &perms, s)?);
        reports.push(freealg::cancellation_report(a.terms, a.k, s)?);
    }
    for s in 1..=a.smax {
        let d = freealg::degenerate_check(a.terms, a.k, s, a.lam)?;
        reports.push(LemmaReport {
            lemma: "degenerate_part".into(),
            parameters: json!({ "L": a.terms, "k": a.k, "s": s, "lam": num(a.lam),
                "ideal": num(d.ideal), "ideal_bound": num(d.ideal_bound),
                "average": num(d.average), "average_bound": num(d.average_bound) }),
            max_deviation: (d.ideal - d.ideal_bound).max(d.average - d.average_bound).max(0.0),
            pass: d.holds(),
        });
        if s <= freealg::ORDER_ERROR_CAP {
            let e = freealg::order_error_norm(a.k, a.terms, s, a.lam)?;
            reports.push(LemmaReport {
                lemma: "order_error".into(),
                parameters: json!({ "L": a.terms, "k": a.k, "s": s, "lam": num(a.lam),
                    "exact": num(e.exact), "refined_bound": num(e.refined_bound), "bound": num(e.bound) }),
                max_deviation: (e.exact - e.refined_bound).max(0.0),
                pass: e.holds(),
            });
        }
    }
    let all_pass = reports.iter().all(|r| r.pass);
    let text = match cli.format() {
        Format::Json => {
            let items: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({ "lemma": r.lemma, "parameters": r.parameters,
                        "max_deviation": num(r.max_deviation), "pass": r.pass })
                })
                .collect();
            pretty(&json!({ "pass": all_pass, "reports": items }))
        }
        Format::Csv => {
            let mut s = String::from("lemma,parameters,max_deviation,pass\n");
            for r in &reports {
                let params = r.parameters.to_string().replace('"', "\"\"");
                s += &format!("{},\"{}\",{},{}\n", r.lemma, params, fmt_sig(r.max_deviation, 10), r.pass);
            }
            s
        }
    };
    emit(cli.out.as_deref(), &text)?;
    if !all_pass {
        eprintln!("verification failed");
    }
    Ok(all_pass)
}
