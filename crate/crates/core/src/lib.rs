//! Random hypergraph discrepancy: models, exact solvers, the partial
//! colouring walk, the iterated colouring algorithm and closed-form bounds.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, threads and the
//! command line live in the `hyperdisc` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod bitset;
pub mod bounds;
pub mod exact;
pub mod hypergraph;
pub mod iterated;
pub mod models;
pub mod partial;
pub mod rng;

pub use bitset::BitSet;
pub use hypergraph::{Colouring, FractionalColouring, Hypergraph, HypergraphError};
pub use models::{generate, ModelError, ModelKind, ModelParams};
