//! Partial colouring by a constrained Gaussian random walk.
//!
//! Given a start point `ρ ∈ [−1,1]^n` and per-edge budgets `λₑ ≥ 0` with
//! `∑ₑ exp(−λₑ²/16) ≤ n/16`, the walk looks for `ψ ∈ [−1,1]^n` with
//! `|ψ(e) − ρ(e)| ≤ λₑ√|e|` on every edge and at least half the coordinates
//! within `δ` of ±1.
//!
//! Each step draws an isotropic Gaussian, projects it orthogonally to the
//! unit vectors of frozen coordinates and to the normalised rows of tight
//! edges, and advances by `γ` times the result. The step is cut short at the
//! first boundary it would cross (a cube face or an edge budget), and the
//! coordinate or edge that stopped it is pinned exactly to its boundary and
//! joins the constraint set. The walk therefore never leaves the feasible
//! region, and every cut grows the constraint set, so at most `n + m` steps
//! are shortened per attempt. An attempt runs for its whole step budget (or
//! until no feasible direction is left) and succeeds if at least `⌈n/2⌉`
//! coordinates are frozen by then.
//!
//! Budgets of zero (up to [`ZERO_BUDGET`]) are tight from the first step.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::bitset::BitSet;
use crate::hypergraph::{FractionalColouring, Hypergraph};
use crate::math;
use crate::rng;

/// Budgets at or below this are treated as "do not move".
pub const ZERO_BUDGET: f64 = 1e-6;
/// Slack allowed on the movement postcondition.
pub const MOVEMENT_TOLERANCE: f64 = 1e-6;

/// Rounding slack on the budget ratio, so a ratio of exactly 1 passes.
pub const BUDGET_TOLERANCE: f64 = 1e-12;

const DEPENDENT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartialError {
    #[error("budget infeasible: sum of exp(-lambda^2/16) is {ratio} times n/16")]
    BudgetInfeasible { ratio: f64 },
    #[error("walk failed after {attempts} attempts")]
    WalkFailed { attempts: u32, telemetry: Vec<AttemptTelemetry> },
    #[error("rho has length {found}, expected {expected}")]
    RhoLength { expected: usize, found: usize },
    #[error("lambda has length {found}, expected {expected}")]
    LambdaLength { expected: usize, found: usize },
    #[error("lambda[{index}] = {value} is not a non-negative number")]
    InvalidLambda { index: usize, value: f64 },
    #[error("delta = {0} is outside (0, 1)")]
    InvalidDelta(f64),
    #[error("max_attempts must be positive")]
    NoAttempts,
}

/// Walk parameters; `None` selects the defaults for the instance size.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WalkParams {
    pub step_size: Option<f64>,
    pub max_steps: Option<u64>,
}

/// Default step size `γ = 1 / (2√ln(16·n·(m+1)/δ))`.
pub fn default_step_size(n: usize, m: usize, delta: f64) -> f64 {
    let arg = 16.0 * (n.max(1) as f64) * ((m + 1) as f64) / delta;
    0.5 / math::sqrt(math::ln(arg))
}

/// Default step budget `⌈16/γ²⌉`.
pub fn default_max_steps(step_size: f64) -> u64 {
    math::ceil(16.0 / (step_size * step_size)) as u64
}

#[derive(Clone, Debug)]
pub struct PartialColouringRequest<'a> {
    pub h: &'a Hypergraph,
    pub rho: FractionalColouring,
    pub lambda: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    pub max_attempts: u32,
    pub walk: WalkParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AttemptOutcome {
    Success,
    /// The step budget ran out with fewer than half the coordinates frozen.
    StepBudget,
    /// The feasible directions collapsed to zero.
    Stalled,
    /// The post-hoc check of the postconditions failed.
    Rejected,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttemptTelemetry {
    pub steps: u64,
    pub frozen: usize,
    pub tight: usize,
    pub outcome: AttemptOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialColouringResult {
    pub psi: FractionalColouring,
    pub frozen: BitSet,
    pub attempts_used: u32,
    pub budget_ratio: f64,
    pub telemetry: Vec<AttemptTelemetry>,
}

/// `(∑ₑ exp(−λₑ²/16)) / (n/16)`; feasible iff at most 1.
pub fn budget_check(h: &Hypergraph, lambda: &[f64]) -> f64 {
    let sum: f64 = lambda.iter().map(|l| math::exp(-l * l / 16.0)).sum();
    if sum == 0.0 {
        return 0.0;
    }
    if h.n() == 0 {
        return f64::INFINITY;
    }
    sum / (h.n() as f64 / 16.0)
}

/// Orthonormal basis grown one vector at a time (classical Gram–Schmidt,
/// applied twice for stability). Projects onto the orthogonal complement.
#[derive(Clone, Debug)]
pub struct Projector {
    dim: usize,
    basis: Vec<Vec<f64>>,
}

impl Projector {
    pub fn new(dim: usize) -> Self {
        Self { dim, basis: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Adds `v` to the span. Returns false if it was (numerically) already in it.
    pub fn add(&mut self, v: &[f64]) -> bool {
        assert_eq!(v.len(), self.dim);
        let norm0 = norm(v);
        if norm0 == 0.0 || self.basis.len() == self.dim {
            return false;
        }
        let mut w = v.to_vec();
        self.project(&mut w);
        let norm1 = norm(&w);
        if norm1 <= DEPENDENT * norm0 {
            return false;
        }
        for x in &mut w {
            *x /= norm1;
        }
        self.basis.push(w);
        true
    }

    /// Replaces `v` by its component orthogonal to the span.
    pub fn project(&self, v: &mut [f64]) {
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(q, v);
                for (x, qi) in v.iter_mut().zip(q) {
                    *x -= c * qi;
                }
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Runs the walk, retrying with fresh streams up to `max_attempts` times.
pub fn partial_colour(req: &PartialColouringRequest<'_>) -> Result<PartialColouringResult, PartialError> {
    let h = req.h;
    let (n, m) = (h.n(), h.m());
    if req.rho.len() != n {
        return Err(PartialError::RhoLength { expected: n, found: req.rho.len() });
    }
    if req.lambda.len() != m {
        return Err(PartialError::LambdaLength { expected: m, found: req.lambda.len() });
    }
    if let Some((index, &value)) = req.lambda.iter().enumerate().find(|(_, l)| !(**l >= 0.0 && l.is_finite())) {
        return Err(PartialError::InvalidLambda { index, value });
    }
    if !(req.delta > 0.0 && req.delta < 1.0) {
        return Err(PartialError::InvalidDelta(req.delta));
    }
    if req.max_attempts == 0 {
        return Err(PartialError::NoAttempts);
    }
    let budget_ratio = budget_check(h, &req.lambda);
    if budget_ratio > 1.0 + BUDGET_TOLERANCE {
        return Err(PartialError::BudgetInfeasible { ratio: budget_ratio });
    }

    let target = n.div_ceil(2);
    if req.rho.frozen_count(req.delta) >= target {
        return Ok(PartialColouringResult {
            psi: req.rho.clone(),
            frozen: req.rho.frozen(req.delta),
            attempts_used: 0,
            budget_ratio,
            telemetry: Vec::new(),
        });
    }

    let gamma = req.walk.step_size.unwrap_or_else(|| default_step_size(n, m, req.delta));
    let max_steps = req.walk.max_steps.unwrap_or_else(|| default_max_steps(gamma));
    let edges: Vec<Vec<u32>> = (0..m).map(|e| h.edge(e).map(|v| v as u32).collect()).collect();

    let mut telemetry = Vec::new();
    for attempt in 0..req.max_attempts {
        let mut walk = Walk::new(req, &edges, target);
        let mut rng = rng::stream(req.seed, attempt as u64);
        let mut outcome = walk.run(&mut rng, gamma, max_steps);
        let psi = FractionalColouring::new(walk.x.clone()).expect("walk stays in the cube");
        if outcome == AttemptOutcome::Success && !satisfies_postconditions(req, &psi, target) {
            outcome = AttemptOutcome::Rejected;
        }
        telemetry.push(AttemptTelemetry {
            steps: walk.steps,
            frozen: walk.frozen_count,
            tight: walk.tight_count,
            outcome,
        });
        if outcome == AttemptOutcome::Success {
            return Ok(PartialColouringResult {
                frozen: psi.frozen(req.delta),
                psi,
                attempts_used: attempt + 1,
                budget_ratio,
                telemetry,
            });
        }
    }
    Err(PartialError::WalkFailed { attempts: req.max_attempts, telemetry })
}

/// Re-checks the output from scratch, independent of the walk's bookkeeping.
fn satisfies_postconditions(req: &PartialColouringRequest<'_>, psi: &FractionalColouring, target: usize) -> bool {
    let h = req.h;
    if psi.frozen_count(req.delta) < target {
        return false;
    }
    (0..h.m()).all(|e| {
        let moved = h.edge_sum(psi, e).unwrap() - h.edge_sum(&req.rho, e).unwrap();
        math::abs(moved) <= req.lambda[e] * math::sqrt(h.edge_size(e) as f64) + MOVEMENT_TOLERANCE
    })
}

enum Hit {
    None,
    Coord(usize),
    Edge(usize),
}

struct Walk<'a> {
    edges: &'a [Vec<u32>],
    /// `1/√|e|`, the entries of the normalised row.
    scale: Vec<f64>,
    lambda: &'a [f64],
    delta: f64,
    target: usize,
    x: Vec<f64>,
    free: Vec<bool>,
    /// `⟨aₑ, x − ρ⟩` for the normalised row `aₑ`.
    moved: Vec<f64>,
    tight: Vec<bool>,
    projector: Projector,
    frozen_count: usize,
    tight_count: usize,
    steps: u64,
}

impl<'a> Walk<'a> {
    fn new(req: &'a PartialColouringRequest<'_>, edges: &'a [Vec<u32>], target: usize) -> Self {
        let n = req.rho.len();
        let scale = edges.iter().map(|e| if e.is_empty() { 0.0 } else { 1.0 / math::sqrt(e.len() as f64) }).collect();
        let mut walk = Self {
            edges,
            scale,
            lambda: &req.lambda,
            delta: req.delta,
            target,
            x: req.rho.values().to_vec(),
            free: vec![true; n],
            moved: vec![0.0; edges.len()],
            tight: vec![false; edges.len()],
            projector: Projector::new(n),
            frozen_count: 0,
            tight_count: 0,
            steps: 0,
        };
        for i in 0..n {
            if math::abs(walk.x[i]) >= 1.0 - walk.delta {
                walk.freeze(i);
            }
        }
        for (e, edge) in edges.iter().enumerate() {
            if !edge.is_empty() && walk.lambda[e] <= ZERO_BUDGET {
                walk.make_tight(e);
            }
        }
        walk
    }

    fn freeze(&mut self, i: usize) {
        self.free[i] = false;
        self.frozen_count += 1;
        let mut unit = vec![0.0; self.x.len()];
        unit[i] = 1.0;
        self.projector.add(&unit);
    }

    fn make_tight(&mut self, e: usize) {
        self.tight[e] = true;
        self.tight_count += 1;
        let mut row = vec![0.0; self.x.len()];
        for &v in &self.edges[e] {
            row[v as usize] = self.scale[e];
        }
        self.projector.add(&row);
    }

    fn rate(&self, e: usize, g: &[f64]) -> f64 {
        self.edges[e].iter().map(|&v| g[v as usize]).sum::<f64>() * self.scale[e]
    }

    fn run<R: Rng>(&mut self, rng: &mut R, gamma: f64, max_steps: u64) -> AttemptOutcome {
        let n = self.x.len();
        let mut g = vec![0.0; n];
        while self.steps < max_steps && self.frozen_count < n {
            self.steps += 1;
            for (gi, &free) in g.iter_mut().zip(&self.free) {
                *gi = if free { rng.sample(StandardNormal) } else { 0.0 };
            }
            self.projector.project(&mut g);
            for (gi, &free) in g.iter_mut().zip(&self.free) {
                if !free {
                    *gi = 0.0;
                }
            }
            if norm(&g) <= DEPENDENT {
                return if self.frozen_count >= self.target {
                    AttemptOutcome::Success
                } else {
                    AttemptOutcome::Stalled
                };
            }

            let mut t = gamma;
            let mut hit = Hit::None;
            for (i, &gi) in g.iter().enumerate() {
                if !self.free[i] || gi == 0.0 {
                    continue;
                }
                let wall = if gi > 0.0 { 1.0 } else { -1.0 };
                let limit = (wall - self.x[i]) / gi;
                if limit < t {
                    t = limit;
                    hit = Hit::Coord(i);
                }
            }
            let rates: Vec<f64> = (0..self.edges.len()).map(|e| self.rate(e, &g)).collect();
            for (e, &s) in rates.iter().enumerate() {
                if self.tight[e] || s == 0.0 {
                    continue;
                }
                let wall = if s > 0.0 { self.lambda[e] } else { -self.lambda[e] };
                let limit = (wall - self.moved[e]) / s;
                if limit < t {
                    t = limit;
                    hit = Hit::Edge(e);
                }
            }
            let t = t.max(0.0);

            for (xi, gi) in self.x.iter_mut().zip(&g) {
                *xi = (*xi + t * gi).clamp(-1.0, 1.0);
            }
            for (m, s) in self.moved.iter_mut().zip(&rates) {
                *m += t * s;
            }
            match hit {
                Hit::Coord(i) => self.x[i] = if g[i] > 0.0 { 1.0 } else { -1.0 },
                Hit::Edge(e) => {
                    self.moved[e] = if rates[e] > 0.0 { self.lambda[e] } else { -self.lambda[e] };
                    self.make_tight(e);
                }
                Hit::None => {}
            }
            for i in 0..n {
                if self.free[i] && math::abs(self.x[i]) >= 1.0 - self.delta {
                    self.freeze(i);
                }
            }
            for e in 0..self.edges.len() {
                if !self.tight[e] && !self.edges[e].is_empty() && math::abs(self.moved[e]) >= self.lambda[e] {
                    self.make_tight(e);
                }
            }
        }
        if self.frozen_count >= self.target {
            AttemptOutcome::Success
        } else {
            AttemptOutcome::StepBudget
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{generate, ModelParams};

    fn request<'a>(h: &'a Hypergraph, lambda: Vec<f64>, seed: u64) -> PartialColouringRequest<'a> {
        PartialColouringRequest {
            h,
            rho: FractionalColouring::zeros(h.n()),
            lambda,
            delta: 0.1,
            seed,
            max_attempts: 10,
            walk: WalkParams::default(),
        }
    }

    #[test]
    fn budget_ratio_examples() {
        let h = Hypergraph::empty(16);
        assert_eq!(budget_check(&h, &[]), 0.0);
        let h = Hypergraph::from_edges(16, (0..16).map(|i| vec![i])).unwrap();
        assert!((budget_check(&h, &[0.0; 16]) - 16.0).abs() < 1e-12);
        let l = 4.0 * 16f64.ln().sqrt();
        assert!((budget_check(&h, &[l; 16]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_output_is_orthogonal_to_the_span() {
        let mut rng = rng::stream(3, 0);
        let dim = 40;
        let mut p = Projector::new(dim);
        let mut added = Vec::new();
        for k in 0..25 {
            let v: Vec<f64> = if k % 5 == 4 {
                // A combination of earlier vectors adds nothing.
                let (a, b): (&Vec<f64>, &Vec<f64>) = (&added[0], &added[1]);
                a.iter().zip(b).map(|(x, y)| 2.0 * x - 0.5 * y).collect()
            } else {
                (0..dim).map(|_| if rng.random_bool(0.3) { 1.0 } else { 0.0 }).collect()
            };
            let grew = p.add(&v);
            if k % 5 == 4 {
                assert!(!grew);
            }
            added.push(v);
        }
        for q in p.basis() {
            assert!((norm(q) - 1.0).abs() < 1e-12);
        }
        for _ in 0..20 {
            let mut step: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            p.project(&mut step);
            for c in &added {
                assert!(dot(c, &step).abs() <= 1e-8 * norm(c) * norm(&step));
            }
        }
    }

    #[test]
    fn unconstrained_pair_freezes() {
        let h = Hypergraph::empty(2);
        let r = partial_colour(&request(&h, vec![], 1)).unwrap();
        assert!(r.psi.values().iter().all(|v| v.abs() >= 0.9));
        assert_eq!(r.frozen.count(), 2);
    }

    #[test]
    fn zero_budget_pair_stays_balanced() {
        let h = Hypergraph::from_edges(2, [vec![0, 1]]).unwrap();
        let mut req = request(&h, vec![0.0], 2);
        // With n = 2 a single zero budget fails the budget check; isolated
        // vertices make it feasible without changing the pair's null space.
        assert!(matches!(partial_colour(&req), Err(PartialError::BudgetInfeasible { .. })));
        let h = Hypergraph::from_edges(32, [vec![0, 1]]).unwrap();
        req = request(&h, vec![0.0], 2);
        for seed in 0..20 {
            req.seed = seed;
            let r = partial_colour(&req).unwrap();
            let v = r.psi.values();
            assert!((v[0] + v[1]).abs() <= 1e-9);
            assert!(r.frozen.count() >= 16);
        }
    }

    #[test]
    fn single_constraint_pair_moves_along_null_space() {
        // The budget check rejects this request, so drive the walk directly.
        let h = Hypergraph::from_edges(2, [vec![0, 1]]).unwrap();
        let req = request(&h, vec![0.0], 5);
        let edges = vec![vec![0u32, 1]];
        let mut walk = Walk::new(&req, &edges, 1);
        let mut rng = rng::stream(5, 0);
        assert_eq!(walk.run(&mut rng, 0.2, 10_000), AttemptOutcome::Success);
        assert!((walk.x[0] + walk.x[1]).abs() <= 1e-12);
        assert!(walk.x[0].abs() >= 0.9);
    }

    #[test]
    fn already_frozen_start_is_returned_unchanged() {
        let h = Hypergraph::from_edges(4, [vec![0, 1, 2]]).unwrap();
        let mut req = request(&h, vec![10.0], 0);
        req.rho = FractionalColouring::new(vec![1.0, -0.95, 0.2, 0.0]).unwrap();
        let r = partial_colour(&req).unwrap();
        assert_eq!(r.attempts_used, 0);
        assert_eq!(r.psi, req.rho);
    }

    #[test]
    fn dense_random_instances_meet_postconditions() {
        let mut ok = 0;
        for seed in 0..20 {
            let h = generate(&ModelParams::edge_independent(64, 64, 0.5, seed)).unwrap();
            let req = PartialColouringRequest {
                delta: 1.0 / 64.0,
                max_attempts: 100,
                ..request(&h, vec![4.0 * 16f64.ln().sqrt(); 64], seed)
            };
            if let Ok(r) = partial_colour(&req) {
                ok += 1;
                assert!(r.frozen.count() >= 32);
                for e in 0..h.m() {
                    let moved = h.edge_sum(&r.psi, e).unwrap();
                    assert!(moved.abs() <= req.lambda[e] * (h.edge_size(e) as f64).sqrt() + 1e-6);
                }
            }
        }
        assert!(ok >= 19, "{ok}/20");
    }

    #[test]
    fn invalid_requests() {
        let h = Hypergraph::empty(4);
        let mut req = request(&h, vec![1.0], 0);
        assert!(matches!(partial_colour(&req), Err(PartialError::LambdaLength { .. })));
        req.lambda = vec![];
        req.delta = 1.0;
        assert_eq!(partial_colour(&req), Err(PartialError::InvalidDelta(1.0)));
        req.delta = 0.5;
        req.max_attempts = 0;
        assert_eq!(partial_colour(&req), Err(PartialError::NoAttempts));
        let h = Hypergraph::from_edges(4, [vec![0]]).unwrap();
        let req = request(&h, vec![f64::NAN], 0);
        assert!(matches!(partial_colour(&req), Err(PartialError::InvalidLambda { index: 0, .. })));
    }

    #[test]
    fn deterministic_given_seed() {
        let h = generate(&ModelParams::edge_independent(32, 32, 0.5, 9)).unwrap();
        let req = request(&h, vec![4.0 * 16f64.ln().sqrt(); 32], 77);
        assert_eq!(partial_colour(&req).unwrap(), partial_colour(&req).unwrap());
    }
}
