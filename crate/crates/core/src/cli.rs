//! Command-line front end. Every report is one JSON line on stdout; diagnostics
//! go to stderr.
//!
//! Exit codes: 0 success, 1 cross-method disagreement, 2 usage or size error,
//! 3 bound breach, 4 I/O or parse error.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::brute::{epsilon_sum_brute, g_brute, BRUTE_LIMIT};
use crate::dp::{bound_report, g_table, g_top, g_top_parallel, GScalar, TOP_LIMIT};
use crate::error::Error;
use crate::fermion::{epsilon_sum, fermion_weight, proposition_report, PrefixProblem};
use crate::search::{exhaustive_max, local_search_max};
use crate::subset::SubsetMask;
use crate::wedge::{g_operator, OPERATOR_LIMIT};
use crate::weight::{ConstantWeight, WeightFunction, WeightMode, WeightTable};

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "PREFIX_SIGN_THREADS";

/// Tolerance for comparisons that involve a floating-point result.
pub const REAL_TOLERANCE: f64 = 1e-9;

/// Largest `n` at which cross-validation includes the brute-force oracle.
pub const CROSS_BRUTE_LIMIT: usize = 8;

pub mod exit {
    pub const OK: i32 = 0;
    pub const DISAGREEMENT: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const BREACH: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Parser, Debug)]
#[command(
    name = "prefix-sign",
    version,
    about = "Signed permutation sums with prefix-set weights"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random weight table as JSON.
    GenWeight {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate g(N) with one or all methods.
    Eval {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Dp)]
        method: MethodArg,
    },
    /// Compare g(N) (or the epsilon sum) against sqrt(n)^n.
    CheckBound {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Dp)]
        method: MethodArg,
    },
    /// Run random tables through every applicable evaluator and report discrepancies.
    CrossValidate {
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Maximize |g(N)| over sign tables.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 1000)]
        max_sweeps: usize,
        #[arg(long)]
        exhaustive: bool,
    },
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Weight table JSON file.
    #[arg(long, conflicts_with = "fermion")]
    weight: Option<PathBuf>,
    /// Prefix problem JSON file.
    #[arg(long)]
    fermion: Option<PathBuf>,
    /// Ambient size for a constant weight (used when no file is given).
    #[arg(long)]
    n: Option<usize>,
    /// Value of the constant weight.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    constant: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Uniform,
    PmOne,
    ZeroOne,
}

impl From<ModeArg> for WeightMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Uniform => WeightMode::Uniform,
            ModeArg::PmOne => WeightMode::PmOne,
            ModeArg::ZeroOne => WeightMode::ZeroOne,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Brute,
    Dp,
    Operator,
    All,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Brute => "brute",
            MethodArg::Dp => "dp",
            MethodArg::Operator => "operator",
            MethodArg::All => "all",
        }
    }
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Io(_) | Error::InvalidTable(_) => exit::IO,
            Error::BoundBreach { .. } => exit::BREACH,
            Error::Size { .. }
            | Error::Domain(_)
            | Error::Shape(_)
            | Error::Level(_)
            | Error::Overflow { .. } => exit::USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: exit::USAGE,
        message: message.into(),
    }
}

/// A command's stdout report and exit code.
pub struct Outcome {
    pub report: Value,
    pub code: i32,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome {
            report,
            code: exit::OK,
        }
    }
}

/// Configures the rayon pool from [`THREADS_ENV`]; silently keeps the default
/// pool when the variable is unset.
pub fn init_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let threads: usize = v
            .parse()
            .map_err(|_| usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::GenWeight { n, seed, mode, out } => gen_weight(n, seed, mode.into(), out),
        Command::Eval { instance, method } => eval(&instance.load()?, method),
        Command::CheckBound { instance, method } => check_bound(&instance.load()?, method),
        Command::CrossValidate {
            n_max,
            trials,
            seed,
        } => cross_validate(n_max, trials, seed),
        Command::Search {
            n,
            seed,
            restarts,
            max_sweeps,
            exhaustive,
        } => {
            let report = if exhaustive {
                exhaustive_max(n)?
            } else {
                local_search_max(n, seed, restarts, max_sweeps)?
            };
            Ok(Outcome::ok(
                serde_json::to_value(report).expect("report serializes"),
            ))
        }
    }
}

fn gen_weight(n: usize, seed: u64, mode: WeightMode, out: PathBuf) -> Result<Outcome, Failure> {
    let table = WeightTable::random(n, seed, mode)?;
    let text = table.to_json();
    std::fs::write(&out, &text).map_err(Error::from)?;
    let digest = format!("{:x}", Sha256::digest(text.as_bytes()));
    Ok(Outcome::ok(json!({
        "path": out.display().to_string(),
        "n": n,
        "seed": seed,
        "mode": mode.as_str(),
        "sha256": digest,
    })))
}

enum Instance {
    Table(WeightTable),
    Constant(ConstantWeight),
    Fermion(PrefixProblem),
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance, Failure> {
        match (&self.weight, &self.fermion, self.n) {
            (Some(path), None, _) => {
                let t = WeightTable::load(path).map_err(|e| with_path(e, path))?;
                if let Some(n) = self.n.filter(|&n| n != t.n()) {
                    return Err(usage(format!(
                        "--n {n} disagrees with the table's n = {}",
                        t.n()
                    )));
                }
                Ok(Instance::Table(t))
            }
            (None, Some(path), _) => {
                let p = PrefixProblem::load(path).map_err(|e| with_path(e, path))?;
                Ok(Instance::Fermion(p))
            }
            (None, None, Some(n)) => Ok(Instance::Constant(ConstantWeight::new(n, self.constant)?)),
            (None, None, None) => Err(usage("give --weight FILE, --fermion FILE, or --n N")),
            (Some(_), Some(_), _) => Err(usage("--weight and --fermion are exclusive")),
        }
    }
}

fn with_path(e: Error, path: &std::path::Path) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

impl Instance {
    fn n(&self) -> usize {
        match self {
            Instance::Table(t) => t.n(),
            Instance::Constant(c) => c.n(),
            Instance::Fermion(p) => p.n(),
        }
    }
}

fn limit_for(method: MethodArg) -> usize {
    match method {
        MethodArg::Brute | MethodArg::All => BRUTE_LIMIT,
        MethodArg::Operator => OPERATOR_LIMIT,
        MethodArg::Dp => TOP_LIMIT,
    }
}

fn check_limit(n: usize, method: MethodArg) -> Result<(), Failure> {
    let limit = limit_for(method);
    if n > limit {
        return Err(usage(format!(
            "method {} supports n <= {limit}, got n = {n}",
            method.name()
        )));
    }
    Ok(())
}

/// `g(N)` by one concrete method.
fn evaluate(inst: &Instance, method: MethodArg) -> Result<GScalar, Failure> {
    let n = inst.n();
    let value = match (inst, method) {
        // the epsilon sum has its own literal oracle
        (Instance::Fermion(p), MethodArg::Brute) => GScalar::Exact(epsilon_sum_brute(p)? as i128),
        (Instance::Fermion(p), MethodArg::Dp) => GScalar::Exact(epsilon_sum(p)?),
        (Instance::Fermion(p), MethodArg::Operator) => {
            GScalar::Real(g_operator(&fermion_weight(p), n)?)
        }
        (Instance::Table(t), m) => eval_weight(t, n, m)?,
        (Instance::Constant(c), m) => eval_weight(c, n, m)?,
        (_, MethodArg::All) => unreachable!("dispatched per method"),
    };
    Ok(value)
}

fn eval_weight<W: WeightFunction>(f: &W, n: usize, method: MethodArg) -> Result<GScalar, Error> {
    match method {
        MethodArg::Brute => g_brute(f, SubsetMask::full(n)?),
        MethodArg::Dp => g_top_parallel(f, n),
        MethodArg::Operator => g_operator(f, n).map(GScalar::Real),
        MethodArg::All => unreachable!("dispatched per method"),
    }
}

fn tolerance(a: GScalar, b: GScalar) -> f64 {
    if a.is_exact() && b.is_exact() {
        0.0
    } else {
        REAL_TOLERANCE
    }
}

fn eval(inst: &Instance, method: MethodArg) -> Result<Outcome, Failure> {
    let n = inst.n();
    check_limit(n, method)?;
    let start = Instant::now();
    if method != MethodArg::All {
        let g = evaluate(inst, method)?;
        return Ok(Outcome::ok(json!({
            "g": g,
            "method": method.name(),
            "n": n,
            "elapsed_ms": start.elapsed().as_secs_f64() * 1e3,
        })));
    }

    let methods = [MethodArg::Brute, MethodArg::Dp, MethodArg::Operator];
    let values: Vec<GScalar> = methods
        .iter()
        .map(|&m| evaluate(inst, m))
        .collect::<Result<_, _>>()?;
    let mut diffs = serde_json::Map::new();
    let mut agree = true;
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            let d = values[i].abs_diff(values[j]);
            agree &= d <= tolerance(values[i], values[j]);
            diffs.insert(
                format!("{}-{}", methods[i].name(), methods[j].name()),
                json!(d),
            );
        }
    }
    let results: serde_json::Map<String, Value> = methods
        .iter()
        .zip(&values)
        .map(|(m, v)| (m.name().to_string(), json!(v)))
        .collect();
    let report = json!({
        "g": values[1],
        "method": "all",
        "n": n,
        "results": results,
        "diffs": diffs,
        "agree": agree,
        "elapsed_ms": start.elapsed().as_secs_f64() * 1e3,
    });
    if !agree {
        eprintln!("methods disagree beyond tolerance");
    }
    Ok(Outcome {
        report,
        code: if agree { exit::OK } else { exit::DISAGREEMENT },
    })
}

fn exact_bound(n: usize) -> Value {
    json!({ "base": n, "exponent": format!("{n}/2") })
}

fn check_bound(inst: &Instance, method: MethodArg) -> Result<Outcome, Failure> {
    if method == MethodArg::All {
        return Err(usage("check-bound takes a single method"));
    }
    let n = inst.n();
    check_limit(n, method)?;
    let g = evaluate(inst, method)?;
    let (mut report, ok) = match inst {
        Instance::Fermion(_) => {
            let sum = match g {
                GScalar::Exact(v) => v,
                // the operator route returns an integer up to rounding
                GScalar::Real(v) => v.round() as i128,
            };
            let r = proposition_report(n, sum);
            (serde_json::to_value(&r).expect("report serializes"), r.ok)
        }
        _ => {
            let r = bound_report(n, g);
            (serde_json::to_value(&r).expect("report serializes"), r.ok)
        }
    };
    report["method"] = json!(method.name());
    report["bound_exact"] = exact_bound(n);
    if !ok {
        eprintln!("bound breach: this indicates an evaluator bug");
    }
    Ok(Outcome {
        report,
        code: if ok { exit::OK } else { exit::BREACH },
    })
}

/// Per-table seed derived from the run seed and the trial coordinates.
pub fn trial_seed(seed: u64, n: usize, mode: WeightMode, trial: usize) -> u64 {
    let mut z = seed
        ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (mode as u64 + 1).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ (trial as u64).wrapping_mul(0x1656_67B1_9E37_79F9);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Default, Clone, Copy, Serialize)]
struct PairStats {
    comparisons: u64,
    exact_max_diff: f64,
    real_max_diff: f64,
}

impl PairStats {
    fn record(&mut self, a: GScalar, b: GScalar) {
        self.comparisons += 1;
        let d = a.abs_diff(b);
        if a.is_exact() && b.is_exact() {
            self.exact_max_diff = self.exact_max_diff.max(d);
        } else {
            self.real_max_diff = self.real_max_diff.max(d);
        }
    }

    fn merge(&mut self, o: &PairStats) {
        self.comparisons += o.comparisons;
        self.exact_max_diff = self.exact_max_diff.max(o.exact_max_diff);
        self.real_max_diff = self.real_max_diff.max(o.real_max_diff);
    }

    fn within_tolerance(&self) -> bool {
        self.exact_max_diff == 0.0 && self.real_max_diff <= REAL_TOLERANCE
    }
}

const PAIRS: [&str; 4] = ["brute-table", "table-top", "top-parallel", "top-operator"];

fn cross_trial(n: usize, mode: WeightMode, seed: u64) -> Result<[PairStats; 4], Error> {
    let f = WeightTable::random(n, seed, mode)?;
    let mut stats = [PairStats::default(); 4];
    let table = g_table(&f, n)?;
    if n <= CROSS_BRUTE_LIMIT {
        for mask in 0..1u64 << n {
            let t = SubsetMask::new(mask, n)?;
            stats[0].record(g_brute(&f, t)?, table.get(mask));
        }
    }
    let top = g_top(&f, n)?;
    stats[1].record(table.top(), top);
    stats[2].record(top, g_top_parallel(&f, n)?);
    if n <= OPERATOR_LIMIT {
        stats[3].record(top, GScalar::Real(g_operator(&f, n)?));
    }
    Ok(stats)
}

fn cross_validate(n_max: usize, trials: usize, seed: u64) -> Result<Outcome, Failure> {
    if n_max == 0 || n_max > OPERATOR_LIMIT {
        return Err(usage(format!("--n-max must be in 1..={OPERATOR_LIMIT}")));
    }
    let mut jobs = Vec::new();
    for n in 1..=n_max {
        for mode in WeightMode::ALL {
            for trial in 0..trials {
                jobs.push((n, mode, trial));
            }
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(n, mode, trial)| cross_trial(n, mode, trial_seed(seed, n, mode, trial)))
        .collect::<Result<_, _>>()?;

    // jobs are already in (n, mode, trial) order; collect keeps it
    let mut total = [PairStats::default(); 4];
    let mut per_n = Vec::new();
    for (chunk_jobs, chunk) in jobs
        .chunks(trials.max(1))
        .zip(results.chunks(trials.max(1)))
    {
        let (n, mode, _) = chunk_jobs[0];
        let mut group = [PairStats::default(); 4];
        for stats in chunk {
            for (g, s) in group.iter_mut().zip(stats) {
                g.merge(s);
            }
        }
        for (t, g) in total.iter_mut().zip(&group) {
            t.merge(g);
        }
        let pairs: serde_json::Map<String, Value> = PAIRS
            .iter()
            .zip(&group)
            .filter(|(_, g)| g.comparisons > 0)
            .map(|(name, g)| (name.to_string(), json!(g)))
            .collect();
        per_n.push(json!({ "n": n, "mode": mode.as_str(), "pairs": pairs }));
    }
    let ok = total.iter().all(PairStats::within_tolerance);
    let summary: serde_json::Map<String, Value> = PAIRS
        .iter()
        .zip(&total)
        .map(|(name, g)| (name.to_string(), json!(g)))
        .collect();
    let report = json!({
        "n_max": n_max,
        "trials": trials,
        "seed": seed,
        "tolerance_real": REAL_TOLERANCE,
        "pairs": summary,
        "groups": per_n,
        "ok": ok,
    });
    Ok(Outcome {
        report,
        code: if ok { exit::OK } else { exit::DISAGREEMENT },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_differ() {
        let a = trial_seed(1, 3, WeightMode::PmOne, 0);
        assert_ne!(a, trial_seed(1, 3, WeightMode::PmOne, 1));
        assert_ne!(a, trial_seed(1, 3, WeightMode::Uniform, 0));
        assert_ne!(a, trial_seed(1, 4, WeightMode::PmOne, 0));
        assert_ne!(a, trial_seed(2, 3, WeightMode::PmOne, 0));
        assert_eq!(a, trial_seed(1, 3, WeightMode::PmOne, 0));
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(Failure::from(Error::size("x", 40, 30)).code, exit::USAGE);
        assert_eq!(Failure::from(Error::Parse("bad".into())).code, exit::IO);
        assert_eq!(
            Failure::from(Error::BoundBreach {
                n: 2,
                value: 3.0,
                bound: 2.0
            })
            .code,
            exit::BREACH
        );
    }
}
