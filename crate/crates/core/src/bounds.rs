//! Closed-form bounds: interval probabilities of signed Bernoulli sums,
//! parity probabilities, hypergeometric tails, first-moment counts and the
//! reference discrepancy curves. All logarithms are natural.
//!
//! Throughout, `S = ∑ aᵢXᵢ` with `aᵢ ∈ {±1}` and independent
//! `Xᵢ ~ Bernoulli(pᵢ)`, where `∑ pᵢ ≥ (1−ε)pn` and `pᵢ ≤ ζ`, so that
//! `Var S ≥ (1−ζ)(1−ε)np`.

use core::f64::consts::{LN_2, PI};

use thiserror::Error;

use crate::iterated;
use crate::math;
use crate::models::ModelKind;

/// Berry–Esseen style constant for sums of independent, non-identical terms.
pub const C_UNI: f64 = 1.120;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BoundsError {
    #[error("variance lower bound (1-zeta)(1-eps)np is not positive")]
    ZeroDenominator,
    #[error("interval [{l}, {r}] is empty")]
    InvalidInterval { l: f64, r: f64 },
    #[error("{name} = {value} is outside its domain")]
    OutOfDomain { name: &'static str, value: f64 },
    #[error("alpha + xi = {0} must be below 1")]
    AlphaPlusXi(f64),
    #[error("xi = {xi} is below 1/m = {min}")]
    XiBelowOneOverM { xi: f64, min: f64 },
    #[error("need at least 2 edges, got {0}")]
    TooFewEdges(usize),
    #[error("degree {d} outside [1, {m}]")]
    InvalidDegree { d: usize, m: usize },
    #[error("dense regime requires m > n, got n = {n}, m = {m}")]
    NotDense { n: usize, m: usize },
    #[error("dense first-moment bound needs gamma = min(pn, m/n) > 1, got {0}")]
    GammaTooSmall(f64),
}

fn domain(name: &'static str, value: f64, ok: bool) -> Result<(), BoundsError> {
    if ok {
        Ok(())
    } else {
        Err(BoundsError::OutOfDomain { name, value })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundParams {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub eps: f64,
    pub zeta: f64,
    pub kappa: f64,
    pub c_uni: f64,
}

impl BoundParams {
    /// The unconditioned edge-independent setting: `ε = 0`, `ζ = p`.
    pub fn independent(n: usize, m: usize, p: f64, kappa: f64) -> Self {
        Self { n, m, p, eps: 0.0, zeta: p, kappa, c_uni: C_UNI }
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        domain("p", self.p, self.p > 0.0 && self.p < 1.0)?;
        domain("eps", self.eps, (0.0..1.0).contains(&self.eps))?;
        domain("zeta", self.zeta, self.zeta > 0.0 && self.zeta < 1.0)?;
        domain("kappa", self.kappa, self.kappa > 0.0)?;
        domain("c_uni", self.c_uni, self.c_uni > 0.0)
    }

    /// `(1−ζ)(1−ε)np`, the variance lower bound.
    pub fn variance_floor(&self) -> f64 {
        (1.0 - self.zeta) * (1.0 - self.eps) * self.n as f64 * self.p
    }

    fn sigma_squared(&self) -> Result<f64, BoundsError> {
        self.validate()?;
        let v = self.variance_floor();
        if v > 0.0 {
            Ok(v)
        } else {
            Err(BoundsError::ZeroDenominator)
        }
    }
}

/// Whether `ps` satisfies `∑ pᵢ ≥ (1−ε)pn` and `pᵢ ≤ ζ` with `n = ps.len()`.
pub fn averages_condition(ps: &[f64], p: f64, eps: f64, zeta: f64) -> bool {
    let sum: f64 = ps.iter().sum();
    sum >= (1.0 - eps) * p * ps.len() as f64 && ps.iter().all(|&q| q <= zeta)
}

fn interval(l: f64, r: f64) -> Result<f64, BoundsError> {
    if l <= r {
        Ok(r - l)
    } else {
        Err(BoundsError::InvalidInterval { l, r })
    }
}

/// `P[S ∈ [L,R]] ≤ c/σ + (1 − exp(−(R−L)²/(2πσ²)))^{1/2}` for a sum with standard deviation `sigma`.
pub fn general_interval_probability(sigma: f64, l: f64, r: f64, c_uni: f64) -> Result<f64, BoundsError> {
    let width = interval(l, r)?;
    if !(sigma > 0.0) {
        return Err(BoundsError::ZeroDenominator);
    }
    Ok(c_uni / sigma + math::sqrt(math::one_minus_exp_neg(width * width / (2.0 * PI * sigma * sigma))))
}

/// `(c + (R−L)/√(2π)) / √((1−ζ)(1−ε)np)`.
pub fn interval_bound_rough(params: &BoundParams, l: f64, r: f64) -> Result<f64, BoundsError> {
    let width = interval(l, r)?;
    let var = params.sigma_squared()?;
    Ok((params.c_uni + width / math::sqrt(2.0 * PI)) / math::sqrt(var))
}

/// `c/√((1−ζ)(1−ε)np) + (1 − exp(−(R−L)²/(2π(1−ζ)(1−ε)np)))^{1/2}`.
pub fn interval_bound_tight(params: &BoundParams, l: f64, r: f64) -> Result<f64, BoundsError> {
    interval(l, r)?;
    let var = params.sigma_squared()?;
    general_interval_probability(math::sqrt(var), l, r, params.c_uni)
}

/// Probability that a Binomial(n, p) edge size is even: `½(1 + (1−2p)ⁿ)`.
pub fn parity_even_probability(n: usize, p: f64) -> f64 {
    0.5 * (1.0 + math::powi(1.0 - 2.0 * p, n as i32))
}

/// Probability that two fixed edges of `𝓗(n,m,d)` both have odd size:
/// `(1 − 2(1−2d/m)ⁿ + (1 − 4d(m−d)/(m(m−1)))ⁿ)/4`.
pub fn dependent_parity_pair_probability(n: usize, m: usize, d: usize) -> Result<f64, BoundsError> {
    if m < 2 {
        return Err(BoundsError::TooFewEdges(m));
    }
    if d == 0 || d > m {
        return Err(BoundsError::InvalidDegree { d, m });
    }
    let (mf, df) = (m as f64, d as f64);
    let single = math::powi(1.0 - 2.0 * df / mf, n as i32);
    let pair = math::powi(1.0 - 4.0 * df * (mf - df) / (mf * (mf - 1.0)), n as i32);
    Ok((1.0 - 2.0 * single + pair) / 4.0)
}

/// `2 exp(−λ²μ/3)` with `μ = dj/m`: tail of the number of marked items in
/// a uniform `j`-subset of `m` items, `d` of them marked.
pub fn hypergeometric_tail_bound(m: usize, d: usize, j: usize, lambda: f64) -> Result<f64, BoundsError> {
    domain("lambda", lambda, lambda > 0.0 && lambda < 1.0)?;
    if d == 0 || d > m {
        return Err(BoundsError::InvalidDegree { d, m });
    }
    domain("j", j as f64, j >= 1 && j <= m)?;
    let mu = (d * j) as f64 / m as f64;
    Ok(2.0 * math::exp(-lambda * lambda * mu / 3.0))
}

/// `(8/ξ) exp(−dλ²(1−α−ξ)²/3)`.
pub fn history_failure_bound(m: usize, d: usize, alpha: f64, lambda: f64, xi: f64) -> Result<f64, BoundsError> {
    domain("alpha", alpha, alpha > 0.0 && alpha < 1.0)?;
    domain("lambda", lambda, lambda > 0.0 && lambda < 1.0)?;
    domain("xi", xi, xi > 0.0 && xi < 1.0)?;
    let min = 1.0 / m as f64;
    if xi < min {
        return Err(BoundsError::XiBelowOneOverM { xi, min });
    }
    if alpha + xi >= 1.0 {
        return Err(BoundsError::AlphaPlusXi(alpha + xi));
    }
    if d == 0 || d > m {
        return Err(BoundsError::InvalidDegree { d, m });
    }
    let gap = 1.0 - alpha - xi;
    Ok(8.0 / xi * math::exp(-(d as f64) * lambda * lambda * gap * gap / 3.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    /// `m = O(n)`: `f̂ = 2^{−n/m}√(p(1−p)n)`.
    Sparse,
    /// `m ≫ n`: `f̂ = √(p(1−p)n ln γ)` with `γ = min{pn, m/n}`.
    Dense,
}

/// The scale `f̂` of the first-moment argument.
pub fn first_moment_scale(n: usize, m: usize, p: f64, regime: Regime) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let spread = math::sqrt(p * (1.0 - p) * nf);
    match regime {
        Regime::Sparse => math::powf(2.0, -nf / mf) * spread,
        Regime::Dense => spread * math::sqrt(math::ln((p * nf).min(mf / nf))),
    }
}

/// Natural log of the upper bound on `E[Z]`, the expected number of
/// colourings of `ℍ(n,m,p)` with discrepancy at most `κf̂`.
///
/// Sparse: `n ln 2 + m ln(κf̂(c + √(2/π))/√(p(1−p)n))` when `κf̂ > 1`,
/// otherwise the unsimplified `n ln 2 + m ln((c + 2κf̂/√(2π))/√(p(1−p)n))`
/// (the simplification uses `κf̂ > 1`). Dense:
/// `n ln 2 + m ln(c/√(p(1−p)n) + (1 − exp(−(2κf̂)²/(2πp(1−p)n)))^{1/2})`.
pub fn first_moment_log_expected_count(
    n: usize,
    m: usize,
    p: f64,
    kappa: f64,
    c_uni: f64,
    regime: Regime,
) -> Result<f64, BoundsError> {
    domain("p", p, p > 0.0 && p < 1.0)?;
    domain("kappa", kappa, kappa > 0.0)?;
    domain("n", n as f64, n > 0)?;
    domain("m", m as f64, m > 0)?;
    let (nf, mf) = (n as f64, m as f64);
    let spread = math::sqrt(p * (1.0 - p) * nf);
    let f_hat = first_moment_scale(n, m, p, regime);
    let per_edge = match regime {
        Regime::Sparse if kappa * f_hat > 1.0 => kappa * f_hat * (c_uni + math::sqrt(2.0 / PI)) / spread,
        Regime::Sparse => (c_uni + 2.0 * kappa * f_hat / math::sqrt(2.0 * PI)) / spread,
        Regime::Dense => {
            let gamma = (p * nf).min(mf / nf);
            if !(gamma > 1.0) {
                return Err(BoundsError::GammaTooSmall(gamma));
            }
            let w = 2.0 * kappa * f_hat;
            c_uni / spread + math::sqrt(math::one_minus_exp_neg(w * w / (2.0 * PI * spread * spread)))
        }
    };
    Ok(nf * LN_2 + mf * math::ln(per_edge))
}

/// Reference lower-bound curve with implied constant 1. With `μ = pn` or
/// `dn/m`: `max{2^{−n/m}√μ, 1}` for `m ≤ n`, and `√(μ ln γ)` with
/// `γ = min{μ, m/n}` for `m > n`, both floored at 1.
pub fn lower_bound_curve(n: usize, m: usize, model: ModelKind) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let mu = match model {
        ModelKind::EdgeIndependent { p } => p * nf,
        ModelKind::EdgeDependent { d } => d as f64 * nf / mf,
    };
    if m <= n {
        (math::powf(2.0, -nf / mf) * math::sqrt(mu)).max(1.0)
    } else {
        math::sqrt(mu * math::ln(mu.min(mf / nf)).max(0.0)).max(1.0)
    }
}

/// Reference upper-bound curve `√(μ ln(m/n) β)`, the algorithm's target `f̂`.
pub fn upper_bound_curve(n: usize, m: usize, d: f64) -> Result<f64, BoundsError> {
    if n == 0 || m <= n {
        return Err(BoundsError::NotDense { n, m });
    }
    let beta = iterated::compute_beta(n, m, d).map_err(|_| BoundsError::OutOfDomain { name: "d", value: d })?;
    let mu = d * n as f64 / m as f64;
    Ok(math::sqrt(mu * math::ln(m as f64 / n as f64) * beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn width_zero_interval() {
        let bp = BoundParams::independent(100, 10, 0.3, 0.1);
        let base = C_UNI / (0.7f64 * 100.0 * 0.3).sqrt();
        assert!((interval_bound_rough(&bp, 2.0, 2.0).unwrap() - base).abs() < 1e-15);
        assert!((interval_bound_tight(&bp, 2.0, 2.0).unwrap() - base).abs() < 1e-15);
    }

    #[test]
    fn tight_never_exceeds_rough() {
        for &n in &[4usize, 16, 100, 1000] {
            for &p in &[0.05, 0.3, 0.5, 0.9] {
                for &eps in &[0.0, 0.2, 0.6] {
                    let bp = BoundParams { n, m: 1, p, eps, zeta: p.max(0.1), kappa: 1.0, c_uni: C_UNI };
                    for k in 0..40 {
                        let w = k as f64 * 0.5;
                        let tight = interval_bound_tight(&bp, -w / 2.0, w / 2.0).unwrap();
                        let rough = interval_bound_rough(&bp, -w / 2.0, w / 2.0).unwrap();
                        assert!(tight <= rough + 1e-12, "n={n} p={p} w={w}");
                    }
                }
            }
        }
    }

    #[test]
    fn interval_errors() {
        let bp = BoundParams::independent(10, 10, 0.5, 0.1);
        assert!(matches!(interval_bound_rough(&bp, 1.0, 0.0), Err(BoundsError::InvalidInterval { .. })));
        let zero = BoundParams { n: 0, ..bp };
        assert_eq!(interval_bound_tight(&zero, 0.0, 1.0), Err(BoundsError::ZeroDenominator));
        let bad = BoundParams { zeta: 1.0, ..bp };
        assert!(matches!(interval_bound_tight(&bad, 0.0, 1.0), Err(BoundsError::OutOfDomain { name: "zeta", .. })));
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity_even_probability(7, 0.5), 0.5);
        assert_eq!(parity_even_probability(2, 1.0), 1.0);
        let direct: f64 =
            (0..=4).step_by(2).map(|j| binom(4, j) * 0.3f64.powi(j as i32) * 0.7f64.powi(4 - j as i32)).sum();
        assert!((parity_even_probability(4, 0.3) - direct).abs() < 1e-15);
    }

    #[test]
    fn dependent_pair_examples() {
        for m in [2usize, 5, 9] {
            assert_eq!(dependent_parity_pair_probability(4, m, m).unwrap(), 0.0);
            assert_eq!(dependent_parity_pair_probability(5, m, m).unwrap(), 1.0);
        }
        let (n, m) = (6usize, 10usize);
        let expected = (1.0 + (1.0 - m as f64 / (m as f64 - 1.0)).powi(n as i32)) / 4.0;
        assert!((dependent_parity_pair_probability(n, m, m / 2).unwrap() - expected).abs() < 1e-15);
        assert_eq!(dependent_parity_pair_probability(3, 1, 1), Err(BoundsError::TooFewEdges(1)));
    }

    #[test]
    fn dependent_pair_by_exhaustion() {
        // Each column picks a uniform d-subset of the m rows; the parities of
        // rows 0 and 1 depend on whether each column hits neither, one or both.
        let (m, d) = (6usize, 2usize);
        let subsets: Vec<u32> = (0u32..1 << m).filter(|s| s.count_ones() as usize == d).collect();
        let both = subsets.iter().filter(|s| *s & 3 == 3).count() as f64;
        let one = subsets.iter().filter(|s| (*s & 3).count_ones() == 1).count() as f64;
        let total = subsets.len() as f64;
        for n in 1..=6 {
            // Distribution of (parity of row 0, parity of row 1) over n columns.
            let mut dist = [1.0, 0.0, 0.0, 0.0];
            for _ in 0..n {
                let mut next = [0.0; 4];
                for (state, &pr) in dist.iter().enumerate() {
                    next[state] += pr * (total - both - one) / total;
                    next[state ^ 3] += pr * both / total;
                    next[state ^ 1] += pr * one / 2.0 / total;
                    next[state ^ 2] += pr * one / 2.0 / total;
                }
                dist = next;
            }
            let closed = dependent_parity_pair_probability(n, m, d).unwrap();
            assert!((dist[3] - closed).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn hypergeometric_examples() {
        assert!((hypergeometric_tail_bound(10, 5, 6, 1e-9).unwrap() - 2.0).abs() < 1e-12);
        let near_one = hypergeometric_tail_bound(10, 5, 6, 1.0 - 1e-12).unwrap();
        assert!((near_one - 2.0 * (-1.0f64).exp()).abs() < 1e-9);
        assert!(hypergeometric_tail_bound(10, 5, 6, 1.0).is_err());
        assert!(hypergeometric_tail_bound(10, 5, 6, 0.0).is_err());
    }

    #[test]
    fn history_failure_examples() {
        let small = history_failure_bound(100, 50, 0.5, 1e-9, 0.1).unwrap();
        assert!((small - 80.0).abs() < 1e-6);
        let v = history_failure_bound(600, 300, 0.5, 0.1, 0.1).unwrap();
        let direct = 8.0 / 0.1 * (-300.0 * 0.01 * 0.16 / 3.0f64).exp();
        assert!((v - direct).abs() < 1e-12);
        assert!(history_failure_bound(100, 50, 0.5, 0.1, 0.01).is_ok());
        assert!(matches!(history_failure_bound(100, 50, 0.5, 0.1, 0.009), Err(BoundsError::XiBelowOneOverM { .. })));
        assert!(matches!(history_failure_bound(100, 50, 0.9, 0.1, 0.1), Err(BoundsError::AlphaPlusXi(_))));
        assert!(matches!(
            history_failure_bound(100, 50, 0.0, 0.1, 0.1),
            Err(BoundsError::OutOfDomain { name: "alpha", .. })
        ));
        assert!(matches!(
            history_failure_bound(100, 50, 0.5, 1.0, 0.1),
            Err(BoundsError::OutOfDomain { name: "lambda", .. })
        ));
    }

    #[test]
    fn sparse_first_moment_is_minus_m_at_one_over_e() {
        let kappa = (-1.0f64).exp() / (C_UNI + (2.0 / PI).sqrt());
        for (n, m, p) in [(10_000usize, 20_000usize, 0.5), (4096, 4096, 0.3)] {
            assert!(kappa * first_moment_scale(n, m, p, Regime::Sparse) > 1.0);
            let v = first_moment_log_expected_count(n, m, p, kappa, C_UNI, Regime::Sparse).unwrap();
            assert!((v + m as f64).abs() < 1e-6 * m as f64, "{v}");
        }
    }

    #[test]
    fn dense_first_moment_decreases_in_m() {
        let (n, p, kappa) = (64usize, 0.5, 0.1);
        let mut prev = f64::INFINITY;
        for m in (2 * n..=64 * n).step_by(n) {
            let v = first_moment_log_expected_count(n, m, p, kappa, C_UNI, Regime::Dense).unwrap();
            assert!(v < prev, "m={m}");
            prev = v;
        }
        assert!(matches!(
            first_moment_log_expected_count(64, 64, 0.5, 0.1, C_UNI, Regime::Dense),
            Err(BoundsError::GammaTooSmall(_))
        ));
    }

    #[test]
    fn lower_curve_examples() {
        assert_eq!(lower_bound_curve(100, 10, ModelKind::EdgeIndependent { p: 0.01 }), 1.0);
        let n = 64usize;
        let v = lower_bound_curve(n, n, ModelKind::EdgeIndependent { p: 0.5 });
        assert!((v - 0.5 * (n as f64 / 2.0).sqrt()).abs() < 1e-12);
        let dense = lower_bound_curve(256, 8192, ModelKind::EdgeDependent { d: 1024 });
        assert!((dense - (32.0 * 32f64.ln()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn upper_curve_matches_schedule() {
        for (n, m, d) in [(256usize, 8192usize, 1024.0), (64, 512, 64.0), (1 << 10, 1 << 16, 4096.0)] {
            let s = iterated::make_schedule(n, m, d, None).unwrap();
            assert_eq!(upper_bound_curve(n, m, d).unwrap(), s.f_hat);
            let lower = lower_bound_curve(n, m, ModelKind::EdgeDependent { d: d as usize });
            assert!(lower <= s.f_hat);
        }
        assert!(matches!(upper_bound_curve(10, 10, 5.0), Err(BoundsError::NotDense { .. })));
        // β = 1 once d is large relative to m/n.
        let (n, m, d) = (1_000_000usize, 2_000_000usize, 2e6);
        let mu = d * n as f64 / m as f64;
        assert!((upper_bound_curve(n, m, d).unwrap() - (mu * 2f64.ln()).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn averages_condition_examples() {
        assert!(averages_condition(&[0.2, 0.3, 0.25], 0.25, 0.0, 0.3));
        assert!(!averages_condition(&[0.2, 0.3, 0.25], 0.25, 0.0, 0.29));
        assert!(!averages_condition(&[0.1, 0.1], 0.25, 0.1, 0.5));
    }
}
