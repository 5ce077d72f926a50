//! Structure and algorithms for graphs of highway dimension one.
//!
//! The crate certifies that a weighted graph has highway dimension 1, builds
//! its level-component hierarchy and the resulting tree decomposition of
//! width `O(log aspect ratio)`, and runs approximation schemes for TSP and
//! Steiner Tree on top of exact tree-decomposition DPs. It also generates
//! the two NP-hardness gadget families (SAT to Steiner Tree, (<=3,3)-SAT to
//! TSP) together with brute-force oracles that check all of the above.

pub mod cost;
pub mod dp;
pub mod error;
pub mod fptas;
pub mod graph;
pub mod oracles;
pub mod par;
pub mod reductions;
pub mod spcover;
pub mod structure;
pub mod treedecomp;

pub use error::{Error, Result};
pub use graph::{Graph, ScaleValue, Weight};
