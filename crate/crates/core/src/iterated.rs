//! The two-phase iterated colouring algorithm for dense instances.
//!
//! Round `i` works on the active vertex set `Vᵢ` (`|Vᵢ| = N/2^i` after
//! padding `n` up to a power of two `N`). It drops the edges of `H[Vᵢ]` with
//! at most `f̂` active vertices, runs the partial colouring walk from the
//! previous round's colouring with budgets `λₑ = f̂ᵢ/√|e|` (phase one) or
//! `λₑ = 0` (phase two), and retires exactly half of `Vᵢ`: the frozen
//! vertices with the largest `|ψᵢ(v)|`, ties to the lowest index. Rounds
//! `0..=t₁` are phase one, later rounds phase two. Afterwards the still
//! active vertices are set to +1 and every other value is rounded to ±1.
//!
//! A round whose budget ratio exceeds 1 aborts the run with diagnostics.

use alloc::vec::Vec;

use thiserror::Error;

use crate::bitset::BitSet;
use crate::hypergraph::{Colouring, FractionalColouring, Hypergraph};
use crate::math;
use crate::partial::{self, PartialColouringRequest, PartialError, WalkParams, BUDGET_TOLERANCE};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IteratedError {
    #[error("dense regime requires m > n, got n = {n}, m = {m}")]
    NotDense { n: usize, m: usize },
    #[error("degree d = {d} must lie in [1, m = {m}]")]
    InvalidDegree { d: f64, m: usize },
    #[error("dense-regime schedule undefined: mu = {mu} < 4")]
    SparseSchedule { mu: f64 },
    #[error("beta override {0} is below 1")]
    InvalidBeta(f64),
    #[error("instance has {found} vertices but the schedule was made for {expected}")]
    ScheduleMismatch { expected: usize, found: usize },
    #[error("round {round} aborted: budget ratio {ratio}")]
    Aborted { round: u32, ratio: f64, trace: Vec<RoundTrace>, stats: Vec<AbortEventStat> },
    #[error("round {round}: partial colouring failed: {source}")]
    Partial { round: u32, source: PartialError },
}

/// Least `β ≥ 1` with `β·μ ≥ ln(m/n)·(ln μ + 2)⁵`, where `μ = dn/m`.
pub fn compute_beta(n: usize, m: usize, d: f64) -> Result<f64, IteratedError> {
    if n == 0 || m <= n {
        return Err(IteratedError::NotDense { n, m });
    }
    if !(d >= 1.0 && d <= m as f64) {
        return Err(IteratedError::InvalidDegree { d, m });
    }
    let mu = d * n as f64 / m as f64;
    let ratio = m as f64 / n as f64;
    let needed = math::ln(ratio) * math::powi(math::ln(mu) + 2.0, 5) / mu;
    Ok(needed.max(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Phase {
    One,
    Two,
    Post,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Schedule {
    pub n: usize,
    pub m: usize,
    pub d: f64,
    /// `n` rounded up to a power of two.
    pub n_padded: usize,
    pub mu: f64,
    pub beta: f64,
    pub f_hat: f64,
    /// `⌊lg μ⌋`.
    pub t1: u32,
    /// `⌊lg(10n/f̂)⌋ + 1`.
    pub t2: u32,
    pub delta: f64,
    /// Number of walk rounds: `min(max(t₁, t₂), lg N − 1) + 1`.
    pub rounds: u32,
}

impl Schedule {
    /// `f̂ᵢ = f̂·(i+2)⁻²`.
    pub fn f_hat_round(&self, i: u32) -> f64 {
        self.f_hat / math::powi(i as f64 + 2.0, 2)
    }

    pub fn phase(&self, i: u32) -> Phase {
        if i >= self.rounds {
            Phase::Post
        } else if i <= self.t1 {
            Phase::One
        } else {
            Phase::Two
        }
    }

    /// Row-size threshold `sᵢ = βμ / (16(i+2)⁵)` of the phase-one abort event.
    pub fn row_threshold(&self, i: u32) -> f64 {
        self.beta * self.mu / (16.0 * math::powi(i as f64 + 2.0, 5))
    }

    /// Active vertices entering round `i`.
    pub fn active_count(&self, i: u32) -> usize {
        self.n_padded >> i
    }
}

/// Builds the schedule for `H` with `n` vertices, `m` edges and degree `d`.
pub fn make_schedule(n: usize, m: usize, d: f64, beta_override: Option<f64>) -> Result<Schedule, IteratedError> {
    let computed = compute_beta(n, m, d)?;
    let beta = match beta_override {
        Some(b) if !(b >= 1.0) => return Err(IteratedError::InvalidBeta(b)),
        Some(b) => b,
        None => computed,
    };
    let mu = d * n as f64 / m as f64;
    if mu < 4.0 {
        return Err(IteratedError::SparseSchedule { mu });
    }
    let n_padded = n.next_power_of_two();
    let f_hat = math::sqrt(mu * math::ln(m as f64 / n as f64) * beta);
    let t1 = math::floor(math::log2(mu)) as u32;
    let t2 = (math::floor(math::log2(10.0 * n as f64 / f_hat)).max(0.0) as u32) + 1;
    let lg_n = n_padded.trailing_zeros();
    let last = t1.max(t2).min(lg_n.saturating_sub(1));
    Ok(Schedule { n, m, d, n_padded, mu, beta, f_hat, t1, t2, delta: 1.0 / n as f64, rounds: last + 1 })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoundTrace {
    pub round_index: u32,
    pub phase: Phase,
    pub active_count: usize,
    pub edges_after_pruning: usize,
    pub budget_ratio: f64,
    pub aborted: bool,
    /// `maxₑ |ψᵢ(e) − ρᵢ(e)|` over the surviving edges.
    pub movement_max: f64,
    /// Allowed movement: `f̂ᵢ` in phase one, the walk tolerance in phase two.
    pub movement_bound: f64,
    pub frozen_count: usize,
    /// Surviving edges larger than `sᵢ` (phase one) or all survivors (phase two).
    pub large_rows: usize,
    /// `sᵢ` in phase one, `f̂` in phase two.
    pub large_row_size: f64,
    /// `nᵢ/17` in phase one, `nᵢ/16` in phase two.
    pub large_row_limit: f64,
    pub walk_attempts: u32,
    pub walk_steps: u64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AbortEventStat {
    pub round_index: u32,
    pub phase: Phase,
    pub count: usize,
    pub limit: f64,
    pub good: bool,
}

/// Per-round counts for the abort events: in phase one, rows larger than
/// `sᵢ` against `nᵢ/17`; in phase two, surviving edges against `nᵢ/16`.
pub fn abort_event_stats(trace: &[RoundTrace]) -> Vec<AbortEventStat> {
    trace
        .iter()
        .filter(|r| r.phase != Phase::Post)
        .map(|r| AbortEventStat {
            round_index: r.round_index,
            phase: r.phase,
            count: r.large_rows,
            limit: r.large_row_limit,
            good: r.large_rows as f64 <= r.large_row_limit,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub max_attempts: u32,
    pub walk: WalkParams,
    /// Keep each round's pruned hypergraph in the result.
    pub keep_round_hypergraphs: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { max_attempts: 100, walk: WalkParams::default(), keep_round_hypergraphs: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IteratedResult {
    pub phi: Colouring,
    pub disc: u64,
    pub trace: Vec<RoundTrace>,
    pub schedule: Schedule,
    /// Vertices still active after the last round (padding included).
    pub post_active: usize,
    /// `post_active ≤ f̂/20`.
    pub post_active_within_bound: bool,
    /// Largest change of an edge sum caused by rounding the retired vertices.
    pub max_rounding_change: f64,
    /// Largest gap between `ψ(v)` and the sum of its per-round increments.
    pub telescoping_error: f64,
    /// Pruned hypergraph of each round over its active vertices (if requested).
    pub round_hypergraphs: Vec<Hypergraph>,
}

/// Runs the algorithm with default options.
pub fn run(h: &Hypergraph, schedule: &Schedule, seed: u64) -> Result<IteratedResult, IteratedError> {
    run_with(h, schedule, seed, &RunOptions::default())
}

pub fn run_with(
    h: &Hypergraph,
    schedule: &Schedule,
    seed: u64,
    opts: &RunOptions,
) -> Result<IteratedResult, IteratedError> {
    if h.m() == 0 {
        return Ok(IteratedResult {
            phi: Colouring::all_plus(h.n()),
            disc: 0,
            trace: Vec::new(),
            schedule: schedule.clone(),
            post_active: 0,
            post_active_within_bound: true,
            max_rounding_change: 0.0,
            telescoping_error: 0.0,
            round_hypergraphs: Vec::new(),
        });
    }
    if h.m() <= h.n() {
        return Err(IteratedError::NotDense { n: h.n(), m: h.m() });
    }
    if h.n() != schedule.n {
        return Err(IteratedError::ScheduleMismatch { expected: schedule.n, found: h.n() });
    }

    let big_n = schedule.n_padded;
    let padded = h.pad_vertices(big_n - h.n());
    let mut x = alloc::vec![0.0; big_n];
    let mut increments = alloc::vec![0.0; big_n];
    let mut active = BitSet::full(big_n);
    let mut trace = Vec::new();
    let mut round_hypergraphs = Vec::new();

    for i in 0..schedule.rounds {
        let phase = schedule.phase(i);
        let restriction = padded.restrict(&active);
        let vertices = restriction.vertices;
        let n_i = vertices.len();
        debug_assert_eq!(n_i, schedule.active_count(i));
        let hi = restriction.hypergraph.remove_small_edges(schedule.f_hat);
        let sizes = hi.edge_sizes();
        let (lambda, movement_bound, large_row_size, large_row_limit): (Vec<f64>, f64, f64, f64) = match phase {
            Phase::One => {
                let f_i = schedule.f_hat_round(i);
                let lambda = sizes.iter().map(|&s| f_i / math::sqrt(s as f64)).collect();
                (lambda, f_i, schedule.row_threshold(i), n_i as f64 / 17.0)
            }
            _ => (alloc::vec![0.0; hi.m()], partial::MOVEMENT_TOLERANCE, schedule.f_hat, n_i as f64 / 16.0),
        };
        let large_rows = sizes.iter().filter(|&&s| s as f64 > large_row_size).count();
        let budget_ratio = partial::budget_check(&hi, &lambda);
        let mut round = RoundTrace {
            round_index: i,
            phase,
            active_count: n_i,
            edges_after_pruning: hi.m(),
            budget_ratio,
            aborted: false,
            movement_max: 0.0,
            movement_bound,
            frozen_count: 0,
            large_rows,
            large_row_size,
            large_row_limit,
            walk_attempts: 0,
            walk_steps: 0,
        };
        if budget_ratio > 1.0 + BUDGET_TOLERANCE {
            round.aborted = true;
            trace.push(round);
            let stats = abort_event_stats(&trace);
            return Err(IteratedError::Aborted { round: i, ratio: budget_ratio, trace, stats });
        }

        let rho = FractionalColouring::new(vertices.iter().map(|&v| x[v]).collect()).expect("values stay in the cube");
        let req = PartialColouringRequest {
            h: &hi,
            rho,
            lambda,
            delta: schedule.delta,
            seed: rng::derive(seed, i as u64),
            max_attempts: opts.max_attempts,
            walk: opts.walk,
        };
        let out = partial::partial_colour(&req).map_err(|source| IteratedError::Partial { round: i, source })?;
        round.walk_attempts = out.attempts_used;
        round.walk_steps = out.telemetry.iter().map(|t| t.steps).sum();
        round.frozen_count = out.frozen.count();
        round.movement_max = (0..hi.m())
            .map(|e| math::abs(hi.edge_sum(&out.psi, e).unwrap() - hi.edge_sum(&req.rho, e).unwrap()))
            .fold(0.0, f64::max);

        for (k, &v) in vertices.iter().enumerate() {
            increments[v] += out.psi.get(k) - req.rho.get(k);
            x[v] = out.psi.get(k);
        }

        let mut frozen: Vec<usize> = out.frozen.iter().collect();
        frozen.sort_by(|&a, &b| math::abs(out.psi.get(b)).total_cmp(&math::abs(out.psi.get(a))).then(a.cmp(&b)));
        for &k in &frozen[..n_i / 2] {
            active.remove(vertices[k]);
        }
        trace.push(round);
        if opts.keep_round_hypergraphs {
            round_hypergraphs.push(hi);
        }
    }

    let telescoping_error = x.iter().zip(&increments).map(|(a, b)| math::abs(a - b)).fold(0.0, f64::max);
    let post_active = active.count();
    trace.push(RoundTrace {
        round_index: schedule.rounds,
        phase: Phase::Post,
        active_count: post_active,
        edges_after_pruning: 0,
        budget_ratio: 0.0,
        aborted: false,
        movement_max: 0.0,
        movement_bound: 0.0,
        frozen_count: 0,
        large_rows: 0,
        large_row_size: 0.0,
        large_row_limit: 0.0,
        walk_attempts: 0,
        walk_steps: 0,
    });

    let mut phi = Colouring::from_signs((0..big_n).map(|v| active.contains(v) || x[v] >= 0.0));
    let max_rounding_change = (0..padded.m())
        .map(|e| padded.edge(e).filter(|&v| !active.contains(v)).map(|v| phi.get(v) as f64 - x[v]).sum::<f64>())
        .map(math::abs)
        .fold(0.0, f64::max);
    phi.truncate(h.n());
    let disc = h.colouring_discrepancy(&phi).expect("colouring covers every vertex");
    Ok(IteratedResult {
        phi,
        disc,
        trace,
        schedule: schedule.clone(),
        post_active,
        post_active_within_bound: post_active as f64 <= schedule.f_hat / 20.0,
        max_rounding_change,
        telescoping_error,
        round_hypergraphs,
    })
}
