//! Ratio estimation, theoretical bounds and audits of the per-round
//! probability lemmas.

pub mod audit;
pub mod bounds;
pub mod estimate;

pub use audit::{check_matching_collision_rate, check_packing_feasible_rate, RateAudit, RateRow};
pub use bounds::{
    bound_greedy_k_secretary, bound_k_secretary, bound_matching, bound_packing, greedy_stage_alpha,
    matching_collision_bound, packing_rate_horizon, BoundKind, BoundReport,
};
pub use estimate::{
    estimate_ratio, offline_opt_benchmark, AlgorithmConfig, Benchmark, BenchmarkKind, RoundTally, TrialMode, TrialStats,
};
