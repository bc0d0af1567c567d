//! Offline approximation algorithms used as black boxes by the online
//! algorithms.

pub mod cardinality;
pub mod continuous_greedy;
pub mod lp;
pub mod matching;

pub use cardinality::{
    brute_force_cardinality, greedy_cardinality, greedy_order, greedy_stage_guarantee_check, modular_top_k,
    stage_bound, CardinalityKind, CardinalitySolver, StageCheck,
};
pub use continuous_greedy::{continuous_greedy, ContinuousGreedy};
pub use lp::{lp_maximize, PackingPolytope};
pub use matching::{brute_force_matching, greedy_matching, MatchingSolver, MatchingSolverInput};
