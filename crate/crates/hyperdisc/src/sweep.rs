//! Seeded parameter sweeps and their CSV records.
//!
//! Grid points are enumerated as `n` (outer), `m`, then the model parameter
//! (inner), numbered from 0. Trial `t` at point `k` uses the instance seed
//! [`record_seed`]`(seed_base, k, t)`; solvers that need randomness use the
//! sub-stream `derive(seed, 1)`. Records are sorted by `(point, trial)`
//! before they are returned, so output does not depend on scheduling.

use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use hyperdisc_core::exact::{self, ExactError};
use hyperdisc_core::iterated::{self, IteratedError};
use hyperdisc_core::rng::{self, mix64, RngCore};
use hyperdisc_core::{bounds, generate, Colouring, Hypergraph, ModelKind, ModelParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bumped whenever a CSV column is added, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 17] = [
    "schema_version",
    "model",
    "n",
    "m",
    "p",
    "d",
    "point",
    "trial",
    "seed",
    "solver",
    "measured_disc",
    "wall_ms",
    "lower_curve",
    "upper_curve",
    "aborted",
    "timed_out",
    "odd_edge_present",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    /// Edge-independent ℍ(n, m, p).
    Ind,
    /// Edge-dependent 𝓗(n, m, d).
    Dep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Solver {
    Exact,
    BranchBound,
    Iterated,
    RandomBaseline,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("solver `exact` needs n <= {limit}, grid has n = {n}")]
    ExactTooLarge { n: usize, limit: usize },
    #[error("solver `iterated` needs m > n, grid has n = {n}, m = {m}")]
    IteratedNotDense { n: usize, m: usize },
    #[error("invalid grid point n = {n}, m = {m}, param = {param}: {message}")]
    InvalidPoint { n: usize, m: usize, param: f64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub model: ModelFamily,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    /// `p` values for `ind`, `d` values for `dep`.
    pub param: Vec<f64>,
    pub seeds: u32,
    pub seed_base: u64,
    pub solver: Solver,
    pub threads: usize,
    pub timeout: Duration,
    pub limit_n: usize,
    /// β override for the iterated solver.
    pub beta: Option<f64>,
    /// Fill `wall_ms`; off by default so output is byte-reproducible.
    pub record_timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            model: ModelFamily::Ind,
            n: Vec::new(),
            m: Vec::new(),
            param: Vec::new(),
            seeds: 1,
            seed_base: 0,
            solver: Solver::BranchBound,
            threads: 1,
            timeout: Duration::from_secs(60),
            limit_n: exact::DEFAULT_LIMIT_N,
            beta: None,
            record_timing: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub n: usize,
    pub m: usize,
    pub kind: ModelKind,
}

impl SweepConfig {
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &m in &self.m {
                for &param in &self.param {
                    let kind = match self.model {
                        ModelFamily::Ind => ModelKind::EdgeIndependent { p: param },
                        ModelFamily::Dep => ModelKind::EdgeDependent { d: param as usize },
                    };
                    out.push(GridPoint { index: out.len(), n, m, kind });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.model == ModelFamily::Dep {
            if let Some(&param) = self.param.iter().find(|d| d.fract() != 0.0 || **d < 0.0) {
                let (n, m) = (self.n.first().copied().unwrap_or(0), self.m.first().copied().unwrap_or(0));
                return Err(SweepError::InvalidPoint {
                    n,
                    m,
                    param,
                    message: "d must be a non-negative integer".into(),
                });
            }
        }
        for pt in self.points() {
            let param = match pt.kind {
                ModelKind::EdgeIndependent { p } => p,
                ModelKind::EdgeDependent { d } => d as f64,
            };
            let invalid = |message: String| SweepError::InvalidPoint { n: pt.n, m: pt.m, param, message };
            ModelParams { n: pt.n, m: pt.m, kind: pt.kind, seed: 0 }.validate().map_err(|e| invalid(e.to_string()))?;
            match self.solver {
                Solver::Exact if pt.n > self.limit_n.min(exact::MAX_N) => {
                    return Err(SweepError::ExactTooLarge { n: pt.n, limit: self.limit_n.min(exact::MAX_N) });
                }
                Solver::Iterated if pt.m <= pt.n => return Err(SweepError::IteratedNotDense { n: pt.n, m: pt.m }),
                Solver::Iterated => {
                    iterated::make_schedule(pt.n, pt.m, degree(pt), self.beta).map_err(|e| invalid(e.to_string()))?;
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Column degree used for schedules and curves: `d`, or `pm` for `ind`.
fn degree(pt: GridPoint) -> f64 {
    match pt.kind {
        ModelKind::EdgeIndependent { p } => p * pt.m as f64,
        ModelKind::EdgeDependent { d } => d as f64,
    }
}

/// Instance seed for trial `trial` at grid point `point`:
/// `seed_base ^ mix64((point << 32) | trial)`.
pub fn record_seed(seed_base: u64, point: usize, trial: u32) -> u64 {
    seed_base ^ mix64(((point as u64) << 32) | trial as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema_version: u32,
    pub model: ModelFamily,
    pub n: usize,
    pub m: usize,
    pub p: Option<f64>,
    pub d: Option<usize>,
    pub point: usize,
    pub trial: u32,
    pub seed: u64,
    pub solver: Solver,
    pub measured_disc: Option<u64>,
    pub wall_ms: u64,
    pub lower_curve: f64,
    pub upper_curve: Option<f64>,
    pub aborted: bool,
    pub timed_out: bool,
    pub odd_edge_present: bool,
}

enum Outcome {
    Disc(u64),
    Aborted,
    TimedOut,
}

fn solve(h: &Hypergraph, pt: GridPoint, seed: u64, cfg: &SweepConfig) -> Outcome {
    let start = Instant::now();
    let stop = || start.elapsed() > cfg.timeout;
    let exact_outcome = |r: Result<exact::ExactResult, ExactError>| match r {
        Ok(r) => Outcome::Disc(r.disc),
        Err(ExactError::Interrupted { .. }) => Outcome::TimedOut,
        Err(e) => panic!("validated sweep point rejected by the exact solver: {e}"),
    };
    match cfg.solver {
        Solver::Exact => exact_outcome(exact::disc_exact_with(h, cfg.limit_n, &stop)),
        Solver::BranchBound => exact_outcome(exact::disc_branch_bound_with(h, None, &stop)),
        Solver::Iterated => {
            let schedule = iterated::make_schedule(pt.n, pt.m, degree(pt), cfg.beta).expect("validated schedule");
            match iterated::run(h, &schedule, rng::derive(seed, 1)) {
                Ok(r) => Outcome::Disc(r.disc),
                Err(IteratedError::Aborted { .. } | IteratedError::Partial { .. }) => Outcome::Aborted,
                Err(e) => panic!("validated sweep point rejected by the iterated solver: {e}"),
            }
        }
        Solver::RandomBaseline => {
            let mut rng = rng::stream(seed, 1);
            let phi = Colouring::from_signs((0..h.n()).map(|_| rng.next_u64() >> 63 == 0));
            Outcome::Disc(h.colouring_discrepancy(&phi).expect("full colouring"))
        }
    }
}

fn run_one(pt: GridPoint, trial: u32, cfg: &SweepConfig) -> ExperimentRecord {
    let seed = record_seed(cfg.seed_base, pt.index, trial);
    let h = generate(&ModelParams { n: pt.n, m: pt.m, kind: pt.kind, seed }).expect("validated model parameters");
    let start = Instant::now();
    let outcome = solve(&h, pt, seed, cfg);
    let wall_ms = if cfg.record_timing { start.elapsed().as_millis() as u64 } else { 0 };
    let (p, d) = match pt.kind {
        ModelKind::EdgeIndependent { p } => (Some(p), None),
        ModelKind::EdgeDependent { d } => (None, Some(d)),
    };
    let upper_curve = if pt.m > pt.n { bounds::upper_bound_curve(pt.n, pt.m, degree(pt)).ok() } else { None };
    ExperimentRecord {
        schema_version: SCHEMA_VERSION,
        model: cfg.model,
        n: pt.n,
        m: pt.m,
        p,
        d,
        point: pt.index,
        trial,
        seed,
        solver: cfg.solver,
        measured_disc: match outcome {
            Outcome::Disc(v) => Some(v),
            _ => None,
        },
        wall_ms,
        lower_curve: bounds::lower_bound_curve(pt.n, pt.m, pt.kind),
        upper_curve,
        aborted: matches!(outcome, Outcome::Aborted),
        timed_out: matches!(outcome, Outcome::TimedOut),
        odd_edge_present: h.has_odd_edge(),
    }
}

/// Runs every (grid point, trial) pair on `cfg.threads` workers.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ExperimentRecord>, SweepError> {
    cfg.validate()?;
    let tasks: Vec<(GridPoint, u32)> =
        cfg.points().into_iter().flat_map(|pt| (0..cfg.seeds).map(move |t| (pt, t))).collect();
    let next = AtomicUsize::new(0);
    let records = Mutex::new(Vec::with_capacity(tasks.len()));
    thread::scope(|s| {
        for _ in 0..cfg.threads.clamp(1, tasks.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(pt, trial)) = tasks.get(k) else { break };
                let r = run_one(pt, trial, cfg);
                records.lock().unwrap().push(r);
            });
        }
    });
    let mut records = records.into_inner().unwrap();
    records.sort_by_key(|r| (r.point, r.trial));
    Ok(records)
}

/// Writes the header and records as CSV with LF line endings.
pub fn write_csv<W: io::Write>(records: &[ExperimentRecord], out: W) -> Result<(), SweepError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[ExperimentRecord]) -> Result<String, SweepError> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ExperimentRecord>, SweepError> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(SweepError::Csv(csv::Error::from(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unexpected CSV header: {}", header.iter().collect::<Vec<_>>().join(",")),
        ))));
    }
    Ok(r.deserialize().collect::<Result<Vec<_>, _>>()?)
}
