//! Cross-module empirical checks with a pass/fail report.
//!
//! `Scale::Full` runs every check at the sizes of the acceptance criteria;
//! `Scale::Smoke` shrinks sample counts so the suite finishes in seconds.
//! The report is a pure function of `(seed, scale)`.

use std::collections::BTreeMap;

use hyperdisc_core::bounds::{self, BoundParams, Regime, C_UNI};
use hyperdisc_core::exact;
use hyperdisc_core::iterated::{self, Phase};
use hyperdisc_core::models::{self, column_history};
use hyperdisc_core::partial::{self, PartialColouringRequest, WalkParams};
use hyperdisc_core::rng::{self, Rng, RngCore};
use hyperdisc_core::{generate, FractionalColouring, ModelParams};
use serde::Serialize;

use crate::oracles;
use crate::sweep::{self, ModelFamily, Solver, SweepConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Smoke,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub metrics: BTreeMap<&'static str, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub scale: Scale,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

struct Check {
    name: &'static str,
    passed: bool,
    metrics: BTreeMap<&'static str, f64>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self { name, passed: true, metrics: BTreeMap::new() }
    }

    fn metric(&mut self, key: &'static str, value: f64) -> &mut Self {
        self.metrics.insert(key, value);
        self
    }

    fn require(&mut self, ok: bool) -> &mut Self {
        self.passed &= ok;
        self
    }

    fn done(self) -> CheckReport {
        CheckReport { name: self.name, passed: self.passed, metrics: self.metrics }
    }
}

fn pick<T: Copy>(scale: Scale, smoke: T, full: T) -> T {
    match scale {
        Scale::Smoke => smoke,
        Scale::Full => full,
    }
}

/// Runs all checks.
pub fn verify_suite(seed: u64, scale: Scale) -> VerifyReport {
    let checks = vec![
        oracle_equivalence(seed, scale),
        partial_postconditions(seed, scale),
        iterated_envelope(seed, scale),
        interval_bound_validity(seed, scale),
        parity_formulas(seed, scale),
        hypergeometric_concentration(seed, scale),
        typical_histories(seed, scale),
        phase_transition(seed, scale),
        first_moment_dominance(),
        sweep_determinism(seed),
    ];
    VerifyReport { seed, scale, passed: checks.iter().all(|c| c.passed), checks }
}

/// Random instance with `n ≤ 14` from either model, for the solver cross-check.
pub fn small_instance(seed: u64, k: u64) -> ModelParams {
    let mut r = rng::stream(seed, 1000 + k);
    let n = 6 + rng::below(&mut r, 9) as usize;
    let m = 2 + rng::below(&mut r, 15) as usize;
    let instance_seed = r.next_u64();
    if k % 2 == 0 {
        let p = [0.2, 0.35, 0.5, 0.65][rng::below(&mut r, 4) as usize];
        ModelParams::edge_independent(n, m, p, instance_seed)
    } else {
        let d = 1 + rng::below(&mut r, m as u64) as usize;
        ModelParams::edge_dependent(n, m, d, instance_seed)
    }
}

fn oracle_equivalence(seed: u64, scale: Scale) -> CheckReport {
    let mut c = Check::new("oracle_equivalence");
    let count = pick(scale, 40u64, 200);
    let mut mismatches = 0;
    for k in 0..count {
        let h = generate(&small_instance(seed, k)).unwrap();
        let naive = oracles::naive_disc(&h);
        let gray = exact::disc_exact(&h, exact::DEFAULT_LIMIT_N).unwrap();
        let bb = exact::disc_branch_bound(&h, None).unwrap();
        let witnesses_ok = h.colouring_discrepancy(&gray.witness).unwrap() == gray.disc
            && h.colouring_discrepancy(&bb.witness).unwrap() == bb.disc;
        if gray.disc != naive || bb.disc != naive || !witnesses_ok {
            mismatches += 1;
        }
    }
    c.metric("instances", count as f64).metric("mismatches", mismatches as f64).require(mismatches == 0);
    c.done()
}

/// Budget used by the partial colouring check: `λ = 4√ln(32m/n)` makes the
/// budget ratio exactly 1/2.
pub fn partial_check_lambda(n: usize, m: usize) -> f64 {
    4.0 * (32.0 * m as f64 / n as f64).ln().sqrt()
}

fn partial_postconditions(seed: u64, scale: Scale) -> CheckReport {
    let mut c = Check::new("partial_postconditions");
    let requests = pick(scale, 10u64, 50);
    let (n, m) = (64, 64);
    let (mut successes, mut violations) = (0u64, 0u64);
    for k in 0..requests {
        let h = generate(&ModelParams::edge_independent(n, m, 0.5, rng::derive(seed, 2000 + k))).unwrap();
        let req = PartialColouringRequest {
            h: &h,
            rho: FractionalColouring::zeros(n),
            lambda: vec![partial_check_lambda(n, m); m],
            delta: 1.0 / n as f64,
            seed: rng::derive(seed, 3000 + k),
            max_attempts: 100,
            walk: WalkParams::default(),
        };
        if let Ok(r) = partial::partial_colour(&req) {
            successes += 1;
            let moved_ok = (0..m).all(|e| {
                let moved = h.edge_sum(&r.psi, e).unwrap() - h.edge_sum(&req.rho, e).unwrap();
                moved.abs() <= req.lambda[e] * (h.edge_size(e) as f64).sqrt() + 1e-6
            });
            if !moved_ok || r.psi.frozen_count(req.delta) < n / 2 {
                violations += 1;
            }
        }
    }
    let rate = successes as f64 / requests as f64;
    c.metric("requests", requests as f64)
        .metric("success_rate", rate)
        .metric("violations", violations as f64)
        .require(violations == 0 && rate >= 0.95);
    c.done()
}

fn iterated_envelope(seed: u64, scale: Scale) -> CheckReport {
    let mut c = Check::new("iterated_envelope");
    let runs = pick(scale, 2u64, 20);
    let (n, m, d) = (256, 8192, 1024);
    let schedule = iterated::make_schedule(n, m, d as f64, None).unwrap();
    let envelope = 4.0 * schedule.f_hat + 1.0;
    let (mut aborts, mut over, mut movement_violations, mut worst) = (0u64, 0u64, 0u64, 0u64);
    for k in 0..runs {
        let h = generate(&ModelParams::edge_dependent(n, m, d, rng::derive(seed, 4000 + k))).unwrap();
        match iterated::run(&h, &schedule, rng::derive(seed, 5000 + k)) {
            Ok(r) => {
                worst = worst.max(r.disc);
                over += (r.disc as f64 > envelope) as u64;
                movement_violations += r
                    .trace
                    .iter()
                    .filter(|t| t.phase != Phase::Post && t.movement_max > t.movement_bound + 1e-6)
                    .count() as u64;
            }
            Err(_) => aborts += 1,
        }
    }
    c.metric("runs", runs as f64)
        .metric("f_hat", schedule.f_hat)
        .metric("envelope", envelope)
        .metric("max_disc", worst as f64)
        .metric("aborts", aborts as f64)
        .metric("movement_violations", movement_violations as f64)
        .require(aborts == 0 && over == 0 && movement_violations == 0);
    c.done()
}

/// Intervals `[L, R]` used by the bound-validity grid.
pub const BOUND_INTERVALS: [(f64, f64); 5] = [(0.0, 0.0), (-1.0, 1.0), (-2.0, 3.0), (-4.0, 4.0), (1.0, 6.0)];

fn interval_bound_validity(seed: u64, scale: Scale) -> CheckReport {
    let mut c = Check::new("interval_bound_validity");
    let ns: &[usize] = pick(scale, &[4, 8, 12], &[2, 4, 6, 8, 10, 12, 14, 16]);
    let vectors = pick(scale, 4u64, 20);
    let (mut cases, mut violations) = (0u64, 0u64);
    let mut r = rng::stream(seed, 6000);
    for &n in ns {
        for tenths in 1..=9u32 {
            let p = tenths as f64 / 10.0;
            let params = BoundParams::independent(n, 1, p, 1.0);
            for _ in 0..vectors {
                let coeffs: Vec<i8> = (0..n).map(|_| if r.random_bool(0.5) { 1 } else { -1 }).collect();
                let dist = oracles::signed_sum_distribution(&coeffs, tenths);
                for &(l, rr) in &BOUND_INTERVALS {
                    let exact = oracles::interval_probability(&dist, n, l, rr);
                    let tight = bounds::interval_bound_tight(&params, l, rr).unwrap();
                    let rough = bounds::interval_bound_rough(&params, l, rr).unwrap();
                    cases += 1;
                    violations += !(exact <= tight && tight <= rough) as u64;
                }
            }
        }
    }
    c.metric("cases", cases as f64).metric("violations", violations as f64).require(violations == 0);
    c.done()
}

fn parity_formulas(seed: u64, scale: Scale) -> CheckReport {
    let mut c = Check::new("parity_formulas");
    let mut max_err: f64 = 0.0;
    for n in 0..=20u64 {
        for tenths in 0..=10 {
            let p = tenths as f64 / 10.0;
            max_err = max_err
                .max((bounds::parity_even_probability(n as usize, p) - oracles::binomial_even_probability(n, p)).abs());
        }
    }
    let samples = pick(scale, 100_000u64, 1_000_000);
    let (n, m, d) = (5, 6, 2);
    let mut both_odd = 0u64;
    for k in 0..samples {
        let h = generate(&ModelParams::edge_dependent(n, m, d, rng::derive(seed, k) ^ 0x7061_7269_7479)).unwrap();
        both_odd += (h.edge_size(0) % 2 == 1 && h.edge_size(1) % 2 == 1) as u64;
    }
    let closed = bounds::dependent_parity_pair_probability(n, m, d).unwrap();
    let empirical = both_odd as f64 / samples as f64;
    let se = (closed * (1.0 - closed) / samples as f64).sqrt();
    c.metric("max_binomial_error", max_err)
        .metric("pair_closed_form", closed)
        .metric("pair_empirical", empirical)
        .metric("pair_z", (empirical - closed) / se)
        .require(max_err <= 1e-12 && (empirical - closed).abs() <= 3.0 * se);
    c.done()
}

fn hypergeometric_concentration(seed: u64, scale: Scale) -> CheckReport {
    let mut c = Check::new("hypergeometric_concentration");
    let (mut cases, mut violations) = (0u64, 0u64);
    for &m in &[10u64, 25, 40, 70, 100] {
        for d in (1..=m).step_by((m / 5) as usize) {
            for j in (1..=m).step_by((m / 7).max(1) as usize) {
                for &lambda in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                    let tail = oracles::hypergeometric_two_sided_tail(m, d, j, lambda);
                    let bound = bounds::hypergeometric_tail_bound(m as usize, d as usize, j as usize, lambda).unwrap();
                    cases += 1;
                    violations += (tail > bound) as u64;
                }
            }
        }
    }
    let (n, m, d) = (500, 400, 40);
    let columns = pick(scale, 100usize, 500);
    let alpha = models::history_alpha(n, m);
    let (lambda, xi) = (0.5, 0.1);
    let h = generate(&ModelParams::edge_dependent(n, m, d, rng::derive(seed, 7000))).unwrap();
    let hist = column_history(&h, d).unwrap();
    let failures = (0..columns).filter(|&k| !models::column_concentrated(&hist, k, alpha, lambda, xi)).count();
    let rate = failures as f64 / columns as f64;
    let bound = bounds::history_failure_bound(m, d, alpha, lambda, xi).unwrap();
    c.metric("pmf_cases", cases as f64)
        .metric("pmf_violations", violations as f64)
        .metric("columns", columns as f64)
        .metric("column_failure_rate", rate)
        .metric("history_failure_bound", bound)
        .require(violations == 0 && rate <= bound);
    c.done()
}

fn typical_histories(seed: u64, scale: Scale) -> CheckReport {
    let mut c = Check::new("typical_histories");
    let runs = pick(scale, 20u64, 200);
    let (n, m, d) = (500, 400, 40);
    let p = d as f64 / m as f64;
    let i = (models::history_alpha(n, m) * m as f64).floor() as usize;
    let holds = (0..runs)
        .filter(|&k| {
            let h = generate(&ModelParams::edge_dependent(n, m, d, rng::derive(seed, 8000 + k))).unwrap();
            models::history_event_q(&column_history(&h, d).unwrap(), i, 0.5, p, p)
        })
        .count();
    let rate = holds as f64 / runs as f64;
    c.metric("runs", runs as f64).metric("row", i as f64).metric("q_rate", rate).require(rate >= 0.95);
    c.done()
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Number of adjacent increases in a sequence that should not increase.
pub fn inversions(xs: &[f64]) -> usize {
    xs.windows(2).filter(|w| w[1] > w[0]).count()
}

pub const DENSE_DEGREES: [usize; 5] = [256, 512, 1024, 2048, 4096];

fn phase_transition(seed: u64, scale: Scale) -> CheckReport {
    let mut c = Check::new("phase_transition");
    let cfg = SweepConfig {
        model: ModelFamily::Ind,
        n: vec![24],
        m: (2..=24).step_by(2).collect(),
        param: vec![0.5],
        seeds: pick(scale, 20, 200),
        seed_base: seed,
        solver: Solver::BranchBound,
        ..SweepConfig::default()
    };
    let records = sweep::run_sweep(&cfg).unwrap();
    let fractions: Vec<f64> = cfg
        .m
        .iter()
        .map(|&m| {
            let at: Vec<_> = records.iter().filter(|r| r.m == m).collect();
            at.iter().filter(|r| r.measured_disc.is_some_and(|v| v <= 1)).count() as f64 / at.len() as f64
        })
        .collect();
    let inv = inversions(&fractions);
    let (first, last) = (fractions[0], *fractions.last().unwrap());

    let (n, m) = (256usize, 8192usize);
    let runs = pick(scale, 1u64, 5);
    let mut discs = Vec::new();
    let mut scales = Vec::new();
    for &d in &DENSE_DEGREES {
        let schedule = iterated::make_schedule(n, m, d as f64, None).unwrap();
        let mut total = 0.0;
        for k in 0..runs {
            let h =
                generate(&ModelParams::edge_dependent(n, m, d, rng::derive(seed, 9000 + 16 * d as u64 + k))).unwrap();
            total +=
                iterated::run(&h, &schedule, rng::derive(seed, 9500 + k)).map(|r| r.disc as f64).unwrap_or(f64::NAN);
        }
        discs.push(total / runs as f64);
        let mu = d as f64 * n as f64 / m as f64;
        scales.push((mu * (m as f64 / n as f64).ln()).sqrt());
    }
    let corr = pearson(&scales, &discs);
    c.metric("fraction_at_m2", first)
        .metric("fraction_at_m24", last)
        .metric("inversions", inv as f64)
        .metric("dense_pearson", corr)
        .require(inv <= 1 && first >= 0.9 && last <= 0.5 && corr >= 0.9);
    c.done()
}

fn first_moment_dominance() -> CheckReport {
    let mut c = Check::new("first_moment_dominance");
    let (n, m, p, kappa) = (16, 16, 0.5, 0.05);
    let f_hat = bounds::first_moment_scale(n, m, p, Regime::Sparse);
    let exact = oracles::first_moment_exact(n, m, 5, kappa * f_hat);
    let log_bound = bounds::first_moment_log_expected_count(n, m, p, kappa, C_UNI, Regime::Sparse).unwrap();
    c.metric("expected_count", exact).metric("bound", log_bound.exp()).require(exact <= log_bound.exp());
    c.done()
}

fn sweep_determinism(seed: u64) -> CheckReport {
    let mut c = Check::new("sweep_determinism");
    let cfg = SweepConfig {
        n: vec![10, 12],
        m: vec![8, 12],
        param: vec![0.5],
        seeds: 4,
        seed_base: seed,
        solver: Solver::Exact,
        ..SweepConfig::default()
    };
    let a = sweep::to_csv_string(&sweep::run_sweep(&cfg).unwrap()).unwrap();
    let b = sweep::to_csv_string(&sweep::run_sweep(&cfg).unwrap()).unwrap();
    let threaded = sweep::to_csv_string(&sweep::run_sweep(&SweepConfig { threads: 4, ..cfg }).unwrap()).unwrap();
    c.metric("bytes", a.len() as f64).require(a == b && a == threaded);
    c.done()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helpers() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]) - 0.9986).abs() < 1e-3);
        assert_eq!(inversions(&[1.0, 0.9, 0.95, 0.5]), 1);
        let lambda = partial_check_lambda(64, 64);
        let ratio = 64.0 * (-lambda * lambda / 16.0).exp() / 4.0;
        assert!((ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn smoke_report_is_deterministic() {
        let a = first_moment_dominance();
        assert!(a.passed);
        assert_eq!(oracle_equivalence(3, Scale::Smoke), oracle_equivalence(3, Scale::Smoke));
    }
}
