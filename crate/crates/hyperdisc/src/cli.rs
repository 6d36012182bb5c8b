//! The `hyperdisc` command line.
//!
//! [`run`] parses arguments and returns what should be printed, so the
//! binary is a thin wrapper and tests can drive every subcommand in-process.
//! Errors are reported as a single JSON object.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use hyperdisc_core::bounds::{self, BoundParams, Regime, C_UNI};
use hyperdisc_core::iterated::{self, RunOptions};
use hyperdisc_core::{exact, generate, Colouring, ModelKind, ModelParams};
use serde::Serialize;
use thiserror::Error;

use crate::hdg;
use crate::parallel;
use crate::sweep::{self, ModelFamily, Solver, SweepConfig};
use crate::verify::{self, Scale};

#[derive(Debug, Parser)]
#[command(name = "hyperdisc", version, about = "Random hypergraph discrepancy toolkit")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a hypergraph and print it in HDG v1 format.
    Gen(GenArgs),
    /// Exact discrepancy of an HDG file.
    Exact(ExactArgs),
    /// Colour an HDG file with the iterated partial colouring algorithm.
    Colour(ColourArgs),
    /// Evaluate a closed-form bound.
    Bounds(BoundsArgs),
    /// Run a seeded parameter sweep and write CSV.
    Sweep(SweepArgs),
    /// Run the empirical self-checks and print a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: ModelFamily,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Edge probability (model `ind`).
    #[arg(long, required_if_eq("model", "ind"))]
    p: Option<f64>,
    /// Column degree (model `dep`).
    #[arg(long, required_if_eq("model", "dep"))]
    d: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
enum ExactMethod {
    /// Gray-code enumeration.
    Gray,
    /// Depth-first branch and bound.
    BranchBound,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = exact::DEFAULT_LIMIT_N)]
    limit_n: usize,
    #[arg(long, value_enum, default_value_t = ExactMethod::Gray)]
    method: ExactMethod,
}

#[derive(Debug, Args)]
struct ColourArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Column degree used to build the schedule.
    #[arg(long)]
    d: f64,
    #[arg(long)]
    beta: Option<f64>,
    /// Write one JSON object per round to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    formula: String,
    /// Comma-separated `key=value` pairs.
    #[arg(long, default_value = "")]
    params: String,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    model: ModelFamily,
    /// Values of n: `a,b,c` or an inclusive range `start:end:step`.
    #[arg(long)]
    n: String,
    #[arg(long)]
    m: String,
    #[arg(long, required_if_eq("model", "ind"))]
    p: Option<String>,
    #[arg(long, required_if_eq("model", "dep"))]
    d: Option<String>,
    /// Trials per grid point.
    #[arg(long, default_value_t = 1)]
    seeds: u32,
    #[arg(long, value_enum, default_value_t = Solver::BranchBound)]
    solver: Solver,
    /// Per-instance timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long, default_value_t = exact::DEFAULT_LIMIT_N)]
    limit_n: usize,
    #[arg(long)]
    beta: Option<f64>,
    /// Record wall-clock time per instance (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Scale::Smoke)]
    scale: Scale,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Params(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Hdg(#[from] hdg::HdgError),
    #[error(transparent)]
    Model(#[from] hyperdisc_core::ModelError),
    #[error(transparent)]
    Exact(#[from] exact::ExactError),
    #[error(transparent)]
    Iterated(#[from] iterated::IteratedError),
    #[error(transparent)]
    Bounds(#[from] bounds::BoundsError),
    #[error(transparent)]
    Sweep(#[from] sweep::SweepError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Params(_) => "params",
            Self::Io(_) => "io",
            Self::Hdg(_) => "format",
            Self::Model(_) => "model",
            Self::Exact(_) => "exact",
            Self::Iterated(_) => "iterated",
            Self::Bounds(_) => "bounds",
            Self::Sweep(_) => "sweep",
            Self::Json(_) => "json",
        }
    }

    /// `{"error": <kind>, "message": <text>}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

/// What the binary should do after a successful parse.
#[derive(Debug, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub exit_code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self { stdout, exit_code: 0 }
    }
}

pub fn run<I, T>(args: I) -> Result<Output, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => return Ok(Output::ok(e.to_string())),
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    let mut out = match &cli.command {
        Command::Gen(a) => Output::ok(gen(a, cli.seed)?),
        Command::Exact(a) => Output::ok(exact_cmd(a, cli.threads)?),
        Command::Colour(a) => Output::ok(colour(a, cli.seed)?),
        Command::Bounds(a) => Output::ok(bounds_cmd(a)?),
        Command::Sweep(a) => Output::ok(sweep_cmd(a, cli.seed, cli.threads)?),
        Command::Verify(a) => {
            let report = verify::verify_suite(cli.seed, a.scale);
            let code = if report.passed { 0 } else { 1 };
            Output { stdout: serde_json::to_string_pretty(&report)? + "\n", exit_code: code }
        }
    };
    if let Some(path) = &cli.out {
        fs::write(path, &out.stdout)?;
        out.stdout.clear();
    }
    Ok(out)
}

fn gen(a: &GenArgs, seed: u64) -> Result<String, CliError> {
    let kind = match a.model {
        ModelFamily::Ind => ModelKind::EdgeIndependent { p: a.p.expect("required by clap") },
        ModelFamily::Dep => ModelKind::EdgeDependent { d: a.d.expect("required by clap") },
    };
    let h = generate(&ModelParams { n: a.n, m: a.m, kind, seed })?;
    Ok(hdg::to_string(&h))
}

fn signs(phi: &Colouring) -> String {
    phi.values().iter().map(|&v| if v > 0 { '+' } else { '-' }).collect()
}

fn exact_cmd(a: &ExactArgs, threads: usize) -> Result<String, CliError> {
    let h = hdg::read(&a.input)?;
    let r = match a.method {
        ExactMethod::Gray => parallel::disc_exact_threads(&h, a.limit_n, threads, &|| false)?,
        ExactMethod::BranchBound => exact::disc_branch_bound(&h, None)?,
    };
    Ok(format!("disc={}\nwitness={}\n", r.disc, signs(&r.witness)))
}

fn colour(a: &ColourArgs, seed: u64) -> Result<String, CliError> {
    let h = hdg::read(&a.input)?;
    let schedule = iterated::make_schedule(h.n(), h.m(), a.d, a.beta)?;
    let result = iterated::run_with(&h, &schedule, seed, &RunOptions::default());
    if let Some(path) = &a.trace {
        let trace = match &result {
            Ok(r) => &r.trace,
            Err(iterated::IteratedError::Aborted { trace, .. }) => trace,
            Err(_) => &Vec::new(),
        };
        let mut text = String::new();
        for round in trace {
            text.push_str(&serde_json::to_string(round)?);
            text.push('\n');
        }
        fs::write(path, text)?;
    }
    let r = result?;
    Ok(format!("disc={}\nf_hat={}\nwitness={}\n", r.disc, schedule.f_hat, signs(&r.phi)))
}

/// `key=value` pairs; every key must be consumed exactly once.
struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for pair in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| CliError::Params(format!("`{pair}` is not key=value")))?;
            if values.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(CliError::Params(format!("duplicate parameter `{k}`")));
            }
        }
        Ok(Self { values })
    }

    fn take_str(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn opt<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| CliError::Params(format!("bad value `{v}` for `{key}`"))),
        }
    }

    fn req<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        self.opt(key)?.ok_or_else(|| CliError::Params(format!("missing parameter `{key}`")))
    }

    fn finish(self) -> Result<(), CliError> {
        match self.values.keys().next() {
            Some(k) => Err(CliError::Params(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

pub const FORMULAS: [&str; 11] = [
    "interval_bound_rough",
    "interval_bound_tight",
    "general_interval_probability",
    "parity_even_probability",
    "dependent_parity_pair_probability",
    "hypergeometric_tail_bound",
    "history_failure_bound",
    "first_moment_log_expected_count",
    "lower_bound_curve",
    "upper_bound_curve",
    "compute_beta",
];

fn bound_params(p: &mut Params) -> Result<BoundParams, CliError> {
    let prob: f64 = p.req("p")?;
    Ok(BoundParams {
        n: p.req("n")?,
        m: p.opt("m")?.unwrap_or(1),
        p: prob,
        eps: p.opt("eps")?.unwrap_or(0.0),
        zeta: p.opt("zeta")?.unwrap_or(prob),
        kappa: p.opt("kappa")?.unwrap_or(1.0),
        c_uni: p.opt("c_uni")?.unwrap_or(C_UNI),
    })
}

fn evaluate(formula: &str, p: &mut Params) -> Result<f64, CliError> {
    let value = match formula {
        "interval_bound_rough" | "interval_bound_tight" => {
            let bp = bound_params(p)?;
            let (l, r) = (p.req("l")?, p.req("r")?);
            if formula == "interval_bound_rough" {
                bounds::interval_bound_rough(&bp, l, r)?
            } else {
                bounds::interval_bound_tight(&bp, l, r)?
            }
        }
        "general_interval_probability" => bounds::general_interval_probability(
            p.req("sigma")?,
            p.req("l")?,
            p.req("r")?,
            p.opt("c_uni")?.unwrap_or(C_UNI),
        )?,
        "parity_even_probability" => bounds::parity_even_probability(p.req("n")?, p.req("p")?),
        "dependent_parity_pair_probability" => {
            bounds::dependent_parity_pair_probability(p.req("n")?, p.req("m")?, p.req("d")?)?
        }
        "hypergeometric_tail_bound" => {
            bounds::hypergeometric_tail_bound(p.req("m")?, p.req("d")?, p.req("j")?, p.req("lambda")?)?
        }
        "history_failure_bound" => {
            bounds::history_failure_bound(p.req("m")?, p.req("d")?, p.req("alpha")?, p.req("lambda")?, p.req("xi")?)?
        }
        "first_moment_log_expected_count" => {
            let regime = match p.take_str("regime").as_deref() {
                Some("sparse") => Regime::Sparse,
                Some("dense") => Regime::Dense,
                Some(other) => return Err(CliError::Params(format!("invalid regime `{other}` (sparse|dense)"))),
                None => return Err(CliError::Params("missing parameter `regime`".into())),
            };
            bounds::first_moment_log_expected_count(
                p.req("n")?,
                p.req("m")?,
                p.req("p")?,
                p.req("kappa")?,
                p.opt("c_uni")?.unwrap_or(C_UNI),
                regime,
            )?
        }
        "lower_bound_curve" => {
            let (n, m) = (p.req("n")?, p.req("m")?);
            let model = match (p.opt::<f64>("p")?, p.opt::<usize>("d")?) {
                (Some(prob), None) => ModelKind::EdgeIndependent { p: prob },
                (None, Some(d)) => ModelKind::EdgeDependent { d },
                _ => return Err(CliError::Params("give exactly one of `p` or `d`".into())),
            };
            bounds::lower_bound_curve(n, m, model)
        }
        "upper_bound_curve" => bounds::upper_bound_curve(p.req("n")?, p.req("m")?, p.req("d")?)?,
        "compute_beta" => iterated::compute_beta(p.req("n")?, p.req("m")?, p.req("d")?)?,
        other => {
            return Err(CliError::Params(format!("unknown formula `{other}`; expected one of {}", FORMULAS.join(", "))))
        }
    };
    Ok(value)
}

#[derive(Serialize)]
struct BoundValue<'a> {
    formula: &'a str,
    params: BTreeMap<String, String>,
    value: f64,
}

fn bounds_cmd(a: &BoundsArgs) -> Result<String, CliError> {
    let mut p = Params::parse(&a.params)?;
    let echo = p.values.clone();
    let value = evaluate(&a.formula, &mut p)?;
    p.finish()?;
    if a.json {
        Ok(serde_json::to_string(&BoundValue { formula: &a.formula, params: echo, value })? + "\n")
    } else {
        Ok(format!("{value}\n"))
    }
}

/// Parses `a,b,c` or the inclusive range `start:end:step`.
fn parse_list<T>(text: &str) -> Result<Vec<T>, CliError>
where
    T: std::str::FromStr + Copy + PartialOrd + std::ops::Add<Output = T> + Default,
{
    let bad = || CliError::Params(format!("bad list `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if let [start, end, step] = parts[..] {
        let (start, end, step): (T, T, T) =
            (start.parse().map_err(|_| bad())?, end.parse().map_err(|_| bad())?, step.parse().map_err(|_| bad())?);
        if !(step > T::default()) {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut x = start;
        while x <= end {
            out.push(x);
            x = x + step;
        }
        return Ok(out);
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn sweep_cmd(a: &SweepArgs, seed: u64, threads: usize) -> Result<String, CliError> {
    let param = match a.model {
        ModelFamily::Ind => parse_list::<f64>(a.p.as_deref().expect("required by clap"))?,
        ModelFamily::Dep => {
            parse_list::<usize>(a.d.as_deref().expect("required by clap"))?.into_iter().map(|d| d as f64).collect()
        }
    };
    if !(a.timeout >= 0.0 && a.timeout.is_finite()) {
        return Err(CliError::Params(format!("bad timeout {}", a.timeout)));
    }
    let cfg = SweepConfig {
        model: a.model,
        n: parse_list(&a.n)?,
        m: parse_list(&a.m)?,
        param,
        seeds: a.seeds,
        seed_base: seed,
        solver: a.solver,
        threads,
        timeout: Duration::from_secs_f64(a.timeout),
        limit_n: a.limit_n,
        beta: a.beta,
        record_timing: a.timing,
    };
    let records = sweep::run_sweep(&cfg)?;
    let mut text = sweep::to_csv_string(&records)?;
    if text.is_empty() {
        writeln!(text).unwrap();
    }
    Ok(text)
}
