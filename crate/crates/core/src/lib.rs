//! Leaf-growth measures on uniform plane binary trees.
//!
//! Growing a uniform binary tree of size `n` at a leaf drawn from its
//! leaf-growth measure yields a uniform tree of size `n + 1`. This crate
//! provides the exact combinatorics behind that measure, samplers for it,
//! the growth chain it drives, the numerics of its multifractal spectrum
//! and a simulation of the continuum spine towards a typical leaf.

pub mod combinatorics;
pub mod error;
pub mod growth;
pub mod measure;
pub mod quadrature;
pub mod rng;
pub mod spectrum;
pub mod spine;
pub mod stats;
pub mod tree;

pub use error::{Error, Result};
pub use tree::{NodeId, PlaneBinaryTree, Profile};

/// `γ = 3(2 − √3)`, the typical exponent of leaf masses.
pub const GAMMA: f64 = 0.803_847_577_293_368_1;
