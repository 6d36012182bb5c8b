//! Slow reference computations used by [`crate::verify`] to check the fast
//! paths: plain enumeration with exact integer arithmetic wherever the
//! sizes allow it.

use hyperdisc_core::Hypergraph;

/// Minimum discrepancy over all `2ⁿ` colourings, no symmetry or pruning.
pub fn naive_disc(h: &Hypergraph) -> u64 {
    assert!(h.n() < 32, "naive enumeration is for small instances");
    let edges: Vec<Vec<usize>> = (0..h.m()).map(|e| h.edge(e).collect()).collect();
    let mut best = u64::MAX;
    for mask in 0u64..1 << h.n() {
        let mut worst = 0;
        for edge in &edges {
            let sum: i64 = edge.iter().map(|&v| if mask >> v & 1 == 1 { -1 } else { 1 }).sum();
            worst = worst.max(sum.unsigned_abs());
        }
        best = best.min(worst);
    }
    best
}

/// Exact distribution of `S = ∑ aᵢXᵢ` with `Xᵢ ~ Bernoulli(k/10)`, by
/// enumerating all `2ⁿ` outcomes. Returns `(s_min, weights)` where
/// `weights[s − s_min]` is `P[S = s]·10ⁿ`, exactly.
pub fn signed_sum_distribution(coeffs: &[i8], p_tenths: u32) -> (i64, Vec<u128>) {
    let n = coeffs.len();
    assert!(n <= 20 && p_tenths <= 10);
    let s_min = -(coeffs.iter().filter(|&&a| a < 0).count() as i64);
    let s_max = coeffs.iter().filter(|&&a| a > 0).count() as i64;
    let mut weights = vec![0u128; (s_max - s_min + 1) as usize];
    let (on, off) = (p_tenths as u128, 10 - p_tenths as u128);
    for outcome in 0u32..1 << n {
        let mut s = 0i64;
        let mut w = 1u128;
        for (i, &a) in coeffs.iter().enumerate() {
            if outcome >> i & 1 == 1 {
                s += a as i64;
                w *= on;
            } else {
                w *= off;
            }
        }
        weights[(s - s_min) as usize] += w;
    }
    (s_min, weights)
}

/// `P[S ∈ [l, r]]` from a distribution returned by [`signed_sum_distribution`].
pub fn interval_probability(dist: &(i64, Vec<u128>), n: usize, l: f64, r: f64) -> f64 {
    let (s_min, weights) = dist;
    let hits: u128 = weights
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let s = (*k as i64 + s_min) as f64;
            l <= s && s <= r
        })
        .map(|(_, &w)| w)
        .sum();
    hits as f64 / 10u128.pow(n as u32) as f64
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `P[Binomial(n, p) is even]` by direct summation.
pub fn binomial_even_probability(n: u64, p: f64) -> f64 {
    (0..=n).step_by(2).map(|j| binomial(n, j) as f64 * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32)).sum()
}

/// Exact hypergeometric pmf: marked items in a uniform `j`-subset of `m`
/// items of which `d` are marked.
pub fn hypergeometric_pmf(m: u64, d: u64, j: u64) -> Vec<f64> {
    let total = binomial(m, j);
    (0..=j.min(d)).map(|k| (binomial(d, k) * binomial(m - d, j - k)) as f64 / total as f64).collect()
}

/// `P[|X − μ| ≥ λμ]` for the hypergeometric `X` with mean `μ = dj/m`.
pub fn hypergeometric_two_sided_tail(m: u64, d: u64, j: u64, lambda: f64) -> f64 {
    let mu = (d * j) as f64 / m as f64;
    hypergeometric_pmf(m, d, j)
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k as f64 - mu).abs() >= lambda * mu)
        .map(|(_, &q)| q)
        .sum()
}

/// `E[Z] = ∑_ψ P[|ψ(e)| ≤ t]^m` for `ℍ(n, m, k/10)`. The probability only
/// depends on how many vertices `ψ` colours +1, so colourings are grouped
/// by that count and one representative is enumerated per group.
pub fn first_moment_exact(n: usize, m: usize, p_tenths: u32, threshold: f64) -> f64 {
    (0..=n)
        .map(|plus| {
            let coeffs: Vec<i8> = (0..n).map(|v| if v < plus { 1 } else { -1 }).collect();
            let dist = signed_sum_distribution(&coeffs, p_tenths);
            let q = interval_probability(&dist, n, -threshold, threshold);
            binomial(n as u64, plus as u64) as f64 * q.powi(m as i32)
        })
        .sum()
}
