//! Exact hypergraph discrepancy `disc(H) = min_ψ max_e |ψ(e)|`.
//!
//! [`disc_exact`] walks all `2^(n−1)` colourings with vertex 0 pinned to +1
//! (a global sign flip preserves discrepancy) in binary-reflected Gray-code
//! order, so each step flips one vertex and touches only the edges of its
//! column. The space is cut into a fixed number of partitions by the highest
//! free vertices; each partition is searched independently and the results
//! merged by `(disc, partition index)`, which makes the outcome independent
//! of how partitions are scheduled across threads.
//!
//! [`disc_branch_bound`] is an independent depth-first search that prunes a
//! partial assignment once some edge is certain to end above the incumbent.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::hypergraph::{Colouring, Hypergraph};

/// Default cap on `n` for [`disc_exact`].
pub const DEFAULT_LIMIT_N: usize = 30;
/// Hard cap: colourings are tracked as 64-bit masks.
pub const MAX_N: usize = 63;
/// Number of high free vertices fixed per partition (at most).
pub const PARTITION_BITS: usize = 4;

const STOP_POLL: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("instance too large: n = {n} exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("search interrupted after {nodes_explored} nodes")]
    Interrupted { nodes_explored: u64 },
    #[error("partition {part} out of range for {count} partitions")]
    BadPartition { part: usize, count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactResult {
    pub disc: u64,
    pub witness: Colouring,
    pub nodes_explored: u64,
}

/// Best colouring found in one partition of the Gray-code search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionResult {
    pub part: usize,
    pub disc: u64,
    /// Bit `v` set means vertex `v` is coloured −1.
    pub minus_mask: u64,
    pub nodes_explored: u64,
}

/// Lower bound from parity: any odd edge forces `|ψ(e)| >= 1`.
pub fn parity_lower_bound(h: &Hypergraph) -> u64 {
    h.has_odd_edge() as u64
}

fn never() -> bool {
    false
}

/// Column supports in CSR form.
struct Columns {
    start: Vec<usize>,
    edges: Vec<u32>,
}

impl Columns {
    fn new(h: &Hypergraph) -> Self {
        let cols = h.columns();
        let mut start = Vec::with_capacity(h.n() + 1);
        let mut edges = Vec::with_capacity(h.total_incidences());
        start.push(0);
        for c in cols {
            edges.extend_from_slice(&c);
            start.push(edges.len());
        }
        Self { start, edges }
    }

    #[inline]
    fn of(&self, v: usize) -> &[u32] {
        &self.edges[self.start[v]..self.start[v + 1]]
    }
}

/// Number of partitions used for an `n`-vertex instance.
pub fn partition_count(n: usize) -> usize {
    1 << partition_bits(n)
}

fn partition_bits(n: usize) -> usize {
    n.saturating_sub(1).min(PARTITION_BITS)
}

fn check_size(h: &Hypergraph, limit_n: usize) -> Result<(), ExactError> {
    let limit = limit_n.min(MAX_N);
    if h.n() > limit {
        return Err(ExactError::TooLarge { n: h.n(), limit });
    }
    Ok(())
}

/// Exact discrepancy by Gray-code enumeration, sequentially over all partitions.
pub fn disc_exact(h: &Hypergraph, limit_n: usize) -> Result<ExactResult, ExactError> {
    disc_exact_with(h, limit_n, &never)
}

/// As [`disc_exact`], polling `stop` periodically.
pub fn disc_exact_with(h: &Hypergraph, limit_n: usize, stop: &dyn Fn() -> bool) -> Result<ExactResult, ExactError> {
    check_size(h, limit_n)?;
    let parts = (0..partition_count(h.n())).map(|p| search_partition(h, p, stop)).collect::<Result<Vec<_>, _>>()?;
    Ok(merge_partitions(h.n(), &parts))
}

/// Combines partition results: minimum discrepancy, ties to the lowest partition.
pub fn merge_partitions(n: usize, parts: &[PartitionResult]) -> ExactResult {
    let nodes_explored = parts.iter().map(|p| p.nodes_explored).sum();
    let best = parts.iter().min_by_key(|p| (p.disc, p.part)).expect("at least one partition");
    ExactResult { disc: best.disc, witness: mask_to_colouring(n, best.minus_mask), nodes_explored }
}

fn mask_to_colouring(n: usize, minus: u64) -> Colouring {
    Colouring::from_signs((0..n).map(|v| minus >> v & 1 == 0))
}

/// Searches one partition: vertex 0 is +1, the top free vertices are fixed
/// by the bits of `part`, the rest are enumerated in Gray-code order.
pub fn search_partition(h: &Hypergraph, part: usize, stop: &dyn Fn() -> bool) -> Result<PartitionResult, ExactError> {
    check_size(h, MAX_N)?;
    let n = h.n();
    let count = partition_count(n);
    if part >= count {
        return Err(ExactError::BadPartition { part, count });
    }
    if n == 0 {
        return Ok(PartitionResult { part, disc: 0, minus_mask: 0, nodes_explored: 1 });
    }
    let k = partition_bits(n);
    let low = n - 1 - k;
    let mut minus: u64 = 0;
    for b in 0..k {
        if part >> b & 1 == 1 {
            minus |= 1 << (n - k + b);
        }
    }

    let cols = Columns::new(h);
    let mut sums: Vec<i32> =
        (0..h.m()).map(|i| h.edge(i).map(|v| if minus >> v & 1 == 1 { -1 } else { 1 }).sum()).collect();
    let mut hist = vec![0u32; n + 1];
    for s in &sums {
        hist[s.unsigned_abs() as usize] += 1;
    }
    let mut max = hist.iter().rposition(|&c| c > 0).unwrap_or(0);
    let lower = parity_lower_bound(h) as usize;

    let mut best = max;
    let mut best_mask = minus;
    let mut nodes = 1u64;
    if best > lower {
        let total: u64 = 1 << low;
        for g in 1..total {
            let v = 1 + g.trailing_zeros() as usize;
            let delta: i32 = if minus >> v & 1 == 1 { 2 } else { -2 };
            minus ^= 1 << v;
            for &e in cols.of(v) {
                let s = &mut sums[e as usize];
                hist[s.unsigned_abs() as usize] -= 1;
                *s += delta;
                let a = s.unsigned_abs() as usize;
                hist[a] += 1;
                if a > max {
                    max = a;
                }
            }
            while hist[max] == 0 {
                max -= 1;
            }
            nodes += 1;
            if max < best {
                best = max;
                best_mask = minus;
                if best == lower {
                    break;
                }
            }
            if g % STOP_POLL == 0 && stop() {
                return Err(ExactError::Interrupted { nodes_explored: nodes });
            }
        }
    }
    Ok(PartitionResult { part, disc: best as u64, minus_mask: best_mask, nodes_explored: nodes })
}

/// Exact discrepancy by depth-first branch and bound.
pub fn disc_branch_bound(h: &Hypergraph, upper_hint: Option<u64>) -> Result<ExactResult, ExactError> {
    disc_branch_bound_with(h, upper_hint, &never)
}

/// As [`disc_branch_bound`], polling `stop` periodically.
///
/// `upper_hint` seeds the incumbent (search for colourings with
/// discrepancy `<= hint`); a hint below the optimum costs one wasted pass.
pub fn disc_branch_bound_with(
    h: &Hypergraph,
    upper_hint: Option<u64>,
    stop: &dyn Fn() -> bool,
) -> Result<ExactResult, ExactError> {
    let mut search = BranchBound::new(h, stop);
    if let Some(hint) = upper_hint {
        search.best = search.best.min(hint as i32 + 1);
        search.run()?;
        if search.witness.is_some() {
            return Ok(search.finish());
        }
        let nodes = search.nodes;
        search = BranchBound::new(h, stop);
        search.nodes = nodes;
    }
    search.run()?;
    Ok(search.finish())
}

struct BranchBound<'a> {
    order: Vec<usize>,
    cols: Columns,
    sums: Vec<i32>,
    remaining: Vec<i32>,
    assign: Vec<i8>,
    lower: i32,
    best: i32,
    witness: Option<Vec<i8>>,
    nodes: u64,
    stop: &'a dyn Fn() -> bool,
    n: usize,
}

impl<'a> BranchBound<'a> {
    fn new(h: &Hypergraph, stop: &'a dyn Fn() -> bool) -> Self {
        let cols = Columns::new(h);
        let mut order: Vec<usize> = (0..h.n()).collect();
        order.sort_by_key(|&v| core::cmp::Reverse(cols.of(v).len()));
        let remaining: Vec<i32> = h.edge_sizes().into_iter().map(|s| s as i32).collect();
        let max_edge = remaining.iter().copied().max().unwrap_or(0);
        Self {
            order,
            cols,
            sums: vec![0; h.m()],
            remaining,
            assign: vec![0; h.n()],
            lower: parity_lower_bound(h) as i32,
            best: max_edge + 1,
            witness: None,
            nodes: 0,
            stop,
            n: h.n(),
        }
    }

    fn run(&mut self) -> Result<(), ExactError> {
        if self.n == 0 {
            if self.best > 0 {
                self.best = 0;
                self.witness = Some(Vec::new());
            }
            return Ok(());
        }
        // The first vertex in the order is pinned to +1.
        let first = self.order[0];
        if self.apply(first, 1) {
            self.dfs(1)?;
        }
        self.undo(first, 1);
        Ok(())
    }

    /// Assigns `v`; returns false if some touched edge can no longer beat the incumbent.
    fn apply(&mut self, v: usize, sign: i8) -> bool {
        self.assign[v] = sign;
        let mut ok = true;
        for &e in self.cols.of(v) {
            let e = e as usize;
            self.sums[e] += sign as i32;
            self.remaining[e] -= 1;
            if self.sums[e].abs() - self.remaining[e] >= self.best {
                ok = false;
            }
        }
        ok
    }

    fn undo(&mut self, v: usize, sign: i8) {
        self.assign[v] = 0;
        for &e in self.cols.of(v) {
            let e = e as usize;
            self.sums[e] -= sign as i32;
            self.remaining[e] += 1;
        }
    }

    fn dfs(&mut self, depth: usize) -> Result<(), ExactError> {
        self.nodes += 1;
        if self.nodes % 4096 == 0 && (self.stop)() {
            return Err(ExactError::Interrupted { nodes_explored: self.nodes });
        }
        if depth == self.n {
            let disc = self.sums.iter().map(|s| s.abs()).max().unwrap_or(0);
            if disc < self.best {
                self.best = disc;
                self.witness = Some(self.assign.clone());
            }
            return Ok(());
        }
        let v = self.order[depth];
        let lean: i32 = self.cols.of(v).iter().map(|&e| self.sums[e as usize]).sum();
        let first: i8 = if lean > 0 { -1 } else { 1 };
        for sign in [first, -first] {
            if self.apply(v, sign) {
                self.dfs(depth + 1)?;
            }
            self.undo(v, sign);
            if self.best <= self.lower {
                break;
            }
        }
        Ok(())
    }

    fn finish(self) -> ExactResult {
        let witness = self.witness.expect("search without a hint always finds a colouring");
        ExactResult {
            disc: self.best as u64,
            witness: Colouring::new(witness).expect("every vertex assigned"),
            nodes_explored: self.nodes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(h: &Hypergraph, r: &ExactResult) {
        assert_eq!(h.colouring_discrepancy(&r.witness).unwrap(), r.disc);
    }

    #[test]
    fn single_edges() {
        let pair = Hypergraph::from_edges(2, [vec![0, 1]]).unwrap();
        let triple = Hypergraph::from_edges(3, [vec![0, 1, 2]]).unwrap();
        for h in [&pair, &triple] {
            let a = disc_exact(h, DEFAULT_LIMIT_N).unwrap();
            let b = disc_branch_bound(h, None).unwrap();
            check(h, &a);
            check(h, &b);
            assert_eq!(a.disc, b.disc);
        }
        assert_eq!(disc_exact(&pair, 30).unwrap().disc, 0);
        assert_eq!(disc_exact(&triple, 30).unwrap().disc, 1);
    }

    #[test]
    fn full_even_edge_is_balanced() {
        let h = Hypergraph::from_edges(10, [(0..10).collect::<Vec<_>>()]).unwrap();
        assert_eq!(disc_branch_bound(&h, None).unwrap().disc, 0);
        assert_eq!(disc_exact(&h, 30).unwrap().disc, 0);
    }

    #[test]
    fn no_edges() {
        let h = Hypergraph::empty(6);
        let r = disc_branch_bound(&h, None).unwrap();
        assert_eq!(r.disc, 0);
        assert_eq!(r.witness.len(), 6);
        assert_eq!(disc_exact(&h, 30).unwrap().disc, 0);
        let z = Hypergraph::from_edges(0, [Vec::<usize>::new()]).unwrap();
        assert_eq!(disc_exact(&z, 30).unwrap().disc, 0);
        assert_eq!(disc_branch_bound(&z, None).unwrap().disc, 0);
    }

    #[test]
    fn too_large_is_an_error() {
        let h = Hypergraph::empty(31);
        assert_eq!(disc_exact(&h, 30), Err(ExactError::TooLarge { n: 31, limit: 30 }));
        assert_eq!(disc_exact(&Hypergraph::empty(70), 100), Err(ExactError::TooLarge { n: 70, limit: MAX_N }));
    }

    #[test]
    fn low_hint_falls_back() {
        // Two of three vertices share a sign, so some pair sums to ±2.
        let h = Hypergraph::from_edges(3, [vec![0, 1, 2], vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let exact = disc_exact(&h, 30).unwrap();
        let hinted = disc_branch_bound(&h, Some(0)).unwrap();
        assert_eq!(exact.disc, hinted.disc);
        check(&h, &hinted);
        let good_hint = disc_branch_bound(&h, Some(exact.disc)).unwrap();
        assert_eq!(good_hint.disc, exact.disc);
    }

    #[test]
    fn interrupt_is_reported() {
        let h = crate::models::generate(&crate::models::ModelParams::edge_independent(24, 24, 0.5, 1)).unwrap();
        let stop = || true;
        assert!(matches!(disc_exact_with(&h, 30, &stop), Err(ExactError::Interrupted { .. })));
    }

    #[test]
    fn partitions_merge_like_the_sequential_search() {
        let h = crate::models::generate(&crate::models::ModelParams::edge_independent(12, 9, 0.5, 4)).unwrap();
        let mut parts: Vec<_> = (0..partition_count(12)).map(|p| search_partition(&h, p, &never).unwrap()).collect();
        parts.reverse();
        assert_eq!(merge_partitions(12, &parts), disc_exact(&h, 30).unwrap());
        assert!(matches!(search_partition(&h, 16, &never), Err(ExactError::BadPartition { .. })));
    }
}
