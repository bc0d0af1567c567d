//! Online monotone submodular maximization in the random-order model.
//!
//! The crate provides value oracles over an indexed ground set, offline
//! approximation solvers used as black boxes, the three online algorithms
//! (cardinality, bipartite matching and linear packing), and a Monte Carlo
//! harness that estimates empirical competitive ratios against offline
//! benchmarks and closed-form bounds.

pub mod error;
pub mod harness;
pub mod instance;
pub mod io;
pub mod online;
pub mod oracle;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
