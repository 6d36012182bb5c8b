//! Hypergraphs as packed incidence matrices, colourings and discrepancy.
//!
//! Row `i` of the incidence matrix is the characteristic vector of edge `i`,
//! stored as `ceil(n / 64)` little-endian 64-bit words. Duplicate rows are
//! allowed: the edge set is a multiset.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::bitset::{words_for, BitSet, Ones};
use crate::math;

/// Absolute slack allowed on fractional values before they are clamped.
pub const FRACTIONAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypergraphError {
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("edge index {index} out of range for {m} edges")]
    EdgeOutOfRange { index: usize, m: usize },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("value {value} at position {position} is not a valid colour")]
    InvalidColour { position: usize, value: f64 },
}

/// An `m × n` 0/1 incidence matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n: usize,
    m: usize,
    stride: usize,
    rows: Vec<u64>,
}

impl Hypergraph {
    /// Hypergraph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Self { n, m: 0, stride: words_for(n), rows: Vec::new() }
    }

    /// Builds a hypergraph from explicit vertex lists, one per edge.
    pub fn from_edges<E, I>(n: usize, edges: E) -> Result<Self, HypergraphError>
    where
        E: IntoIterator<Item = I>,
        I: IntoIterator<Item = usize>,
    {
        let mut h = Self::empty(n);
        for edge in edges {
            h.push_edge(edge)?;
        }
        Ok(h)
    }

    /// Builds a hypergraph from a dense row-major 0/1 matrix.
    pub fn from_dense(n: usize, dense: &[Vec<bool>]) -> Result<Self, HypergraphError> {
        let mut h = Self::empty(n);
        for row in dense {
            if row.len() != n {
                return Err(HypergraphError::LengthMismatch { expected: n, found: row.len() });
            }
            h.push_edge(row.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j))?;
        }
        Ok(h)
    }

    pub fn push_edge<I: IntoIterator<Item = usize>>(&mut self, vertices: I) -> Result<(), HypergraphError> {
        let start = self.rows.len();
        self.rows.resize(start + self.stride, 0);
        for v in vertices {
            if v >= self.n {
                self.rows.truncate(start);
                return Err(HypergraphError::VertexOutOfRange { vertex: v, n: self.n });
            }
            self.rows[start + v / 64] |= 1 << (v % 64);
        }
        self.m += 1;
        Ok(())
    }

    /// Appends a row given as packed words (bits beyond `n` must be zero).
    pub(crate) fn push_row_words(&mut self, words: &[u64]) {
        debug_assert_eq!(words.len(), self.stride);
        self.rows.extend_from_slice(words);
        self.m += 1;
    }

    pub(crate) fn with_capacity(n: usize, m: usize) -> Self {
        let stride = words_for(n);
        Self { n, m: 0, stride, rows: Vec::with_capacity(m * stride) }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Packed words of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.rows[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn contains(&self, edge: usize, vertex: usize) -> bool {
        vertex < self.n && self.row(edge)[vertex / 64] & (1 << (vertex % 64)) != 0
    }

    #[inline]
    pub fn edge_size(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_sizes(&self) -> Vec<usize> {
        (0..self.m).map(|i| self.edge_size(i)).collect()
    }

    /// Vertices of edge `i`, ascending.
    pub fn edge(&self, i: usize) -> Ones<'_> {
        Ones::new(self.row(i))
    }

    /// For every vertex, the edges containing it (the column supports).
    pub fn columns(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n];
        for i in 0..self.m {
            for v in self.edge(i) {
                cols[v].push(i as u32);
            }
        }
        cols
    }

    pub fn total_incidences(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn check_edge(&self, i: usize) -> Result<(), HypergraphError> {
        if i >= self.m {
            return Err(HypergraphError::EdgeOutOfRange { index: i, m: self.m });
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<(), HypergraphError> {
        if len != self.n {
            return Err(HypergraphError::LengthMismatch { expected: self.n, found: len });
        }
        Ok(())
    }

    /// `ψ(e_i) = Σ_{v ∈ e_i} ψ(v)` for a fractional colouring.
    pub fn edge_sum(&self, psi: &FractionalColouring, i: usize) -> Result<f64, HypergraphError> {
        self.check_edge(i)?;
        self.check_len(psi.len())?;
        Ok(self.edge(i).map(|v| psi.values[v]).sum())
    }

    /// `ψ(e_i)` for a ±1 colouring, computed as
    /// `popcount(row & plus) - popcount(row & !plus)`.
    pub fn edge_sum_int(&self, psi: &Colouring, i: usize) -> Result<i64, HypergraphError> {
        self.check_edge(i)?;
        self.check_len(psi.len())?;
        Ok(signed_row_sum(self.row(i), psi.plus_mask().words()))
    }

    /// `max_e |ψ(e)|`, or 0 when there are no edges.
    pub fn colouring_discrepancy(&self, psi: &Colouring) -> Result<u64, HypergraphError> {
        self.check_len(psi.len())?;
        let plus = psi.plus_mask();
        Ok((0..self.m).map(|i| signed_row_sum(self.row(i), plus.words()).unsigned_abs()).max().unwrap_or(0))
    }

    /// Column popcounts.
    pub fn degree_profile(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for i in 0..self.m {
            for v in self.edge(i) {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Keeps only the `active` columns, re-indexed in ascending original order.
    pub fn restrict(&self, active: &BitSet) -> Restriction {
        assert_eq!(active.len(), self.n, "active set width must equal n");
        let vertices: Vec<usize> = active.iter().collect();
        let mut out = Hypergraph::with_capacity(vertices.len(), self.m);
        let mut buf = vec![0u64; out.stride];
        for i in 0..self.m {
            buf.iter_mut().for_each(|w| *w = 0);
            let row = self.row(i);
            for (new, &old) in vertices.iter().enumerate() {
                if row[old / 64] & (1 << (old % 64)) != 0 {
                    buf[new / 64] |= 1 << (new % 64);
                }
            }
            out.push_row_words(&buf);
        }
        Restriction { hypergraph: out, vertices }
    }

    /// Keeps the rows whose size is strictly greater than `threshold`, in order.
    pub fn remove_small_edges(&self, threshold: f64) -> Hypergraph {
        let mut out = Hypergraph::with_capacity(self.n, self.m);
        for i in 0..self.m {
            if self.edge_size(i) as f64 > threshold {
                out.push_row_words(self.row(i));
            }
        }
        out
    }

    /// Adds `extra` isolated vertices.
    pub fn pad_vertices(&self, extra: usize) -> Hypergraph {
        let n = self.n + extra;
        let mut out = Hypergraph::with_capacity(n, self.m);
        let mut buf = vec![0u64; out.stride];
        for i in 0..self.m {
            buf[..self.stride].copy_from_slice(self.row(i));
            out.push_row_words(&buf);
        }
        out
    }

    /// Drops the edges at the given (ascending, distinct) indices.
    pub fn without_edges(&self, drop: &[usize]) -> Hypergraph {
        let mut out = Hypergraph::with_capacity(self.n, self.m);
        let mut it = drop.iter().peekable();
        for i in 0..self.m {
            if it.peek() == Some(&&i) {
                it.next();
                continue;
            }
            out.push_row_words(self.row(i));
        }
        out
    }

    pub(crate) fn set(&mut self, edge: usize, vertex: usize) {
        let w = vertex / 64;
        self.row_mut(edge)[w] |= 1 << (vertex % 64);
    }

    pub fn has_odd_edge(&self) -> bool {
        (0..self.m).any(|i| self.edge_size(i) % 2 == 1)
    }
}

#[inline]
fn signed_row_sum(row: &[u64], plus: &[u64]) -> i64 {
    let mut s = 0i64;
    for (&r, &p) in row.iter().zip(plus) {
        s += (r & p).count_ones() as i64 - (r & !p).count_ones() as i64;
    }
    s
}

/// A hypergraph restricted to a vertex subset, with the new → old vertex map.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub hypergraph: Hypergraph,
    /// `vertices[new] = old`, strictly ascending.
    pub vertices: Vec<usize>,
}

impl Restriction {
    pub fn old_to_new(&self, old: usize) -> Option<usize> {
        self.vertices.binary_search(&old).ok()
    }
}

/// A full colouring `ψ: V → {−1, +1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Colouring {
    values: Vec<i8>,
}

impl Colouring {
    pub fn new(values: Vec<i8>) -> Result<Self, HypergraphError> {
        if let Some((position, &v)) = values.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(HypergraphError::InvalidColour { position, value: v as f64 });
        }
        Ok(Self { values })
    }

    pub fn all_plus(n: usize) -> Self {
        Self { values: vec![1; n] }
    }

    /// `true` maps to +1.
    pub fn from_signs<I: IntoIterator<Item = bool>>(signs: I) -> Self {
        Self { values: signs.into_iter().map(|b| if b { 1 } else { -1 }).collect() }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    #[inline]
    pub fn get(&self, v: usize) -> i8 {
        self.values[v]
    }

    pub fn negated(&self) -> Self {
        Self { values: self.values.iter().map(|&v| -v).collect() }
    }

    pub fn plus_mask(&self) -> BitSet {
        BitSet::from_indices(self.len(), self.values.iter().enumerate().filter(|(_, &v)| v > 0).map(|(i, _)| i))
    }

    pub fn to_fractional(&self) -> FractionalColouring {
        FractionalColouring { values: self.values.iter().map(|&v| v as f64).collect() }
    }

    pub fn truncate(&mut self, n: usize) {
        self.values.truncate(n);
    }
}

/// A fractional colouring `ψ: V → [−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FractionalColouring {
    values: Vec<f64>,
}

impl FractionalColouring {
    /// Accepts values within [`FRACTIONAL_TOLERANCE`] of `[−1, 1]` and clamps them.
    pub fn new(mut values: Vec<f64>) -> Result<Self, HypergraphError> {
        for (position, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || math::abs(*v) > 1.0 + FRACTIONAL_TOLERANCE {
                return Err(HypergraphError::InvalidColour { position, value: *v });
            }
            *v = v.clamp(-1.0, 1.0);
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, v: usize) -> f64 {
        self.values[v]
    }

    /// Number of coordinates with `|ψ(v)| ≥ 1 − δ`.
    pub fn frozen_count(&self, delta: f64) -> usize {
        self.values.iter().filter(|v| math::abs(**v) >= 1.0 - delta).count()
    }

    pub fn frozen(&self, delta: f64) -> BitSet {
        BitSet::from_indices(
            self.len(),
            self.values.iter().enumerate().filter(|(_, v)| math::abs(**v) >= 1.0 - delta).map(|(i, _)| i),
        )
    }

    /// Values at the given (old) indices, in order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self { values: indices.iter().map(|&i| self.values[i]).collect() }
    }

    /// Rounds to the nearest of ±1; exact zero goes to +1.
    pub fn round(&self) -> Colouring {
        Colouring::from_signs(self.values.iter().map(|&v| v >= 0.0))
    }
}
