//! Seeded generators for the edge-independent and edge-dependent random
//! hypergraph models, and the column-history statistics of the
//! edge-dependent model.
//!
//! Draw order is part of the output contract:
//!
//! * edge-independent: one stream `StreamRng::seed_from_u64(seed)`; entry
//!   `(i, j)` is drawn in row-major order and set iff `unit_f64 < p`.
//! * edge-dependent: column `j` uses its own stream `rng::stream(seed, j)`
//!   and selects its `d` rows with a partial Fisher–Yates shuffle of
//!   `0..m`: for `t in 0..d`, swap position `t` with `t + below(m − t)`.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::hypergraph::Hypergraph;
use crate::rng::{self, SeedableRng, StreamRng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("n must be positive")]
    ZeroVertices,
    #[error("m must be positive")]
    ZeroEdges,
    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("degree {d} must satisfy 1 <= d <= m = {m}")]
    InvalidDegree { d: usize, m: usize },
    #[error("column {column} has {found} ones, expected {expected}")]
    ColumnDegree { column: usize, found: usize, expected: usize },
}

/// Which random model to sample from.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelKind {
    /// Every vertex joins every edge independently with probability `p`.
    EdgeIndependent { p: f64 },
    /// Every vertex joins a uniform `d`-subset of the edges.
    EdgeDependent { d: usize },
}

impl ModelKind {
    /// Average edge size `μ` (`pn`, or `dn/m`).
    pub fn mean_edge_size(&self, n: usize, m: usize) -> f64 {
        match *self {
            ModelKind::EdgeIndependent { p } => p * n as f64,
            ModelKind::EdgeDependent { d } => d as f64 * n as f64 / m as f64,
        }
    }

    /// Expected degree, `pm` or `d`.
    pub fn degree(&self, m: usize) -> f64 {
        match *self {
            ModelKind::EdgeIndependent { p } => p * m as f64,
            ModelKind::EdgeDependent { d } => d as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub n: usize,
    pub m: usize,
    pub kind: ModelKind,
    pub seed: u64,
}

impl ModelParams {
    pub fn edge_independent(n: usize, m: usize, p: f64, seed: u64) -> Self {
        Self { n, m, kind: ModelKind::EdgeIndependent { p }, seed }
    }

    pub fn edge_dependent(n: usize, m: usize, d: usize, seed: u64) -> Self {
        Self { n, m, kind: ModelKind::EdgeDependent { d }, seed }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n == 0 {
            return Err(ModelError::ZeroVertices);
        }
        if self.m == 0 {
            return Err(ModelError::ZeroEdges);
        }
        match self.kind {
            ModelKind::EdgeIndependent { p } if !(0.0..=1.0).contains(&p) => Err(ModelError::InvalidProbability(p)),
            ModelKind::EdgeDependent { d } if d == 0 || d > self.m => Err(ModelError::InvalidDegree { d, m: self.m }),
            _ => Ok(()),
        }
    }
}

/// Samples a hypergraph; a pure function of `params`.
pub fn generate(params: &ModelParams) -> Result<Hypergraph, ModelError> {
    params.validate()?;
    let ModelParams { n, m, seed, .. } = *params;
    let mut h = Hypergraph::with_capacity(n, m);
    match params.kind {
        ModelKind::EdgeIndependent { p } => {
            let mut stream = StreamRng::seed_from_u64(seed);
            let mut row = vec![0u64; n.div_ceil(64)];
            for _ in 0..m {
                row.iter_mut().for_each(|w| *w = 0);
                for j in 0..n {
                    if rng::unit_f64(&mut stream) < p {
                        row[j / 64] |= 1 << (j % 64);
                    }
                }
                h.push_row_words(&row);
            }
        }
        ModelKind::EdgeDependent { d } => {
            let empty = vec![0u64; n.div_ceil(64)];
            for _ in 0..m {
                h.push_row_words(&empty);
            }
            let mut idx: Vec<u32> = Vec::with_capacity(m);
            for j in 0..n {
                let mut stream = rng::stream(seed, j as u64);
                idx.clear();
                idx.extend(0..m as u32);
                for t in 0..d {
                    let r = t + rng::below(&mut stream, (m - t) as u64) as usize;
                    idx.swap(t, r);
                    h.set(idx[t] as usize, j);
                }
            }
        }
    }
    Ok(h)
}

/// `B[i][k]`: ones of column `k` strictly below row `i` (rows `1..=i` revealed);
/// `P[i][k] = B[i][k] / (m − i)` for `i < m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnHistory {
    n: usize,
    m: usize,
    d: usize,
    remaining: Vec<u32>,
    probability: Vec<f64>,
}

impl ColumnHistory {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `B[i][k]` for `0 <= i <= m`.
    #[inline]
    pub fn remaining(&self, i: usize, k: usize) -> u32 {
        self.remaining[i * self.n + k]
    }

    /// `P[i][k]` for `0 <= i < m`.
    #[inline]
    pub fn probability(&self, i: usize, k: usize) -> f64 {
        self.probability[i * self.n + k]
    }

    /// Row `i` of `P`.
    pub fn probability_row(&self, i: usize) -> &[f64] {
        &self.probability[i * self.n..(i + 1) * self.n]
    }

    /// Column `k` of `B`, rows `0..=m`.
    pub fn remaining_column(&self, k: usize) -> Vec<u32> {
        (0..=self.m).map(|i| self.remaining(i, k)).collect()
    }
}

/// Computes the column history of an instance whose columns all have `d` ones.
pub fn column_history(h: &Hypergraph, d: usize) -> Result<ColumnHistory, ModelError> {
    let (n, m) = (h.n(), h.m());
    for (column, &found) in h.degree_profile().iter().enumerate() {
        if found != d {
            return Err(ModelError::ColumnDegree { column, found, expected: d });
        }
    }
    let mut remaining = vec![0u32; (m + 1) * n];
    remaining[..n].iter_mut().for_each(|b| *b = d as u32);
    for i in 0..m {
        let (prev, next) = remaining[i * n..(i + 2) * n].split_at_mut(n);
        next.copy_from_slice(prev);
        for k in h.edge(i) {
            next[k] -= 1;
        }
    }
    let mut probability = vec![0.0; m * n];
    for i in 0..m {
        let denom = (m - i) as f64;
        for k in 0..n {
            probability[i * n + k] = remaining[i * n + k] as f64 / denom;
        }
    }
    Ok(ColumnHistory { n, m, d, remaining, probability })
}

/// Event `Q_i`: for every `j <= i`, `Σ_k P[j][k] >= (1 − ε)pn` and
/// `P[j][k] <= (1 + ε)c` for all `k`.
pub fn history_event_q(hist: &ColumnHistory, i: usize, eps: f64, c: f64, p: f64) -> bool {
    assert!(i < hist.m, "row index {i} out of range for m = {}", hist.m);
    let sum_floor = (1.0 - eps) * p * hist.n as f64;
    let cap = (1.0 + eps) * c;
    (0..=i).all(|j| {
        let row = hist.probability_row(j);
        row.iter().sum::<f64>() >= sum_floor && row.iter().all(|&x| x <= cap)
    })
}

/// Whether the concentration window
/// `(1−λ)(1+ξ/(1−α−ξ))⁻¹ p <= P[i][k] <= (1+λ)(1+ξ/(1−α−ξ)) p`
/// holds for all `i <= ⌊αm⌋` in column `k`.
pub fn column_concentrated(hist: &ColumnHistory, k: usize, alpha: f64, lambda: f64, xi: f64) -> bool {
    let p = hist.d as f64 / hist.m as f64;
    let widen = 1.0 + xi / (1.0 - alpha - xi);
    let lo = (1.0 - lambda) / widen * p;
    let hi = (1.0 + lambda) * widen * p;
    let last = crate::math::floor(alpha * hist.m as f64) as usize;
    (0..=last.min(hist.m - 1)).all(|i| {
        let x = hist.probability(i, k);
        lo <= x && x <= hi
    })
}

/// `α = max{n/(n+m), 1/2}`.
pub fn history_alpha(n: usize, m: usize) -> f64 {
    (n as f64 / (n + m) as f64).max(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_parameters() {
        let h = generate(&ModelParams::edge_independent(10, 5, 0.0, 1)).unwrap();
        assert_eq!(h.total_incidences(), 0);
        let h = generate(&ModelParams::edge_independent(10, 5, 1.0, 1)).unwrap();
        assert_eq!(h.total_incidences(), 50);
        let h = generate(&ModelParams::edge_dependent(10, 5, 5, 1)).unwrap();
        assert_eq!(h.total_incidences(), 50);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert_eq!(generate(&ModelParams::edge_independent(0, 5, 0.5, 1)), Err(ModelError::ZeroVertices));
        assert_eq!(generate(&ModelParams::edge_independent(3, 0, 0.5, 1)), Err(ModelError::ZeroEdges));
        assert_eq!(generate(&ModelParams::edge_independent(3, 3, 1.5, 1)), Err(ModelError::InvalidProbability(1.5)));
        assert_eq!(generate(&ModelParams::edge_dependent(3, 3, 4, 1)), Err(ModelError::InvalidDegree { d: 4, m: 3 }));
        assert_eq!(generate(&ModelParams::edge_dependent(3, 3, 0, 1)), Err(ModelError::InvalidDegree { d: 0, m: 3 }));
    }

    #[test]
    fn dependent_columns_have_exactly_d_ones() {
        let h = generate(&ModelParams::edge_dependent(6, 4, 2, 99)).unwrap();
        assert_eq!(h.degree_profile(), vec![2; 6]);
        assert_eq!(h.edge_sizes().iter().sum::<usize>(), 12);
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        for params in [ModelParams::edge_independent(70, 9, 0.3, 5), ModelParams::edge_dependent(70, 9, 4, 5)] {
            assert_eq!(generate(&params).unwrap(), generate(&params).unwrap());
            let other = ModelParams { seed: 6, ..params };
            assert_ne!(generate(&params).unwrap(), generate(&other).unwrap());
        }
    }

    #[test]
    fn independent_moments_match_binomial() {
        let (n, m, p) = (200usize, 100usize, 0.3);
        let seeds = 1000u64;
        let totals: Vec<f64> = (0..seeds)
            .map(|s| generate(&ModelParams::edge_independent(n, m, p, s)).unwrap().total_incidences() as f64)
            .collect();
        let mean = totals.iter().sum::<f64>() / seeds as f64;
        let se = (n as f64 * m as f64 * p * (1.0 - p) / seeds as f64).sqrt();
        assert!((mean - 6000.0).abs() <= 3.0 * se, "mean total {mean}, se {se}");
        let per_edge = mean / m as f64;
        let se_edge = se / m as f64;
        assert!((per_edge - 60.0).abs() <= 3.0 * se_edge);
    }

    #[test]
    fn history_of_full_matrix_is_all_ones() {
        let h = generate(&ModelParams::edge_dependent(5, 4, 4, 0)).unwrap();
        let hist = column_history(&h, 4).unwrap();
        for i in 0..4 {
            assert!(hist.probability_row(i).iter().all(|&x| x == 1.0));
        }
        assert!(!history_event_q(&hist, 0, 0.1, 0.5, 1.0));
    }

    #[test]
    fn history_hand_enumeration() {
        let h = Hypergraph::from_edges(1, [vec![], vec![0]]).unwrap();
        let hist = column_history(&h, 1).unwrap();
        assert_eq!(hist.remaining_column(0), vec![1, 1, 0]);
        assert_eq!(hist.probability(0, 0), 0.5);
        assert_eq!(hist.probability(1, 0), 1.0);
    }

    #[test]
    fn history_rejects_irregular_columns() {
        let h = Hypergraph::from_edges(2, [vec![0], vec![0]]).unwrap();
        assert_eq!(column_history(&h, 2), Err(ModelError::ColumnDegree { column: 1, found: 0, expected: 2 }));
    }

    #[test]
    fn history_matches_suffix_sums() {
        let h = generate(&ModelParams::edge_dependent(50, 40, 8, 17)).unwrap();
        let hist = column_history(&h, 8).unwrap();
        for k in 0..50 {
            for i in 0..=40 {
                let suffix = (i..40).filter(|&r| h.contains(r, k)).count() as u32;
                assert_eq!(hist.remaining(i, k), suffix);
            }
        }
    }

    #[test]
    fn history_invariants_hold() {
        let h = generate(&ModelParams::edge_dependent(30, 25, 7, 3)).unwrap();
        let hist = column_history(&h, 7).unwrap();
        for k in 0..30 {
            assert_eq!(hist.remaining(0, k), 7);
            assert_eq!(hist.remaining(25, k), 0);
            for i in 0..25 {
                let step = hist.remaining(i, k) - hist.remaining(i + 1, k);
                assert_eq!(step, h.contains(i, k) as u32);
                assert!((0.0..=1.0).contains(&hist.probability(i, k)));
            }
        }
    }

    #[test]
    fn vacuous_thresholds_make_q_true() {
        let h = generate(&ModelParams::edge_dependent(20, 10, 3, 8)).unwrap();
        let hist = column_history(&h, 3).unwrap();
        // (1 − ε)pn = 0 with p = 0, and (1 + ε)c >= 1.
        assert!(history_event_q(&hist, 9, 0.5, 0.9, 0.0));
    }
}
