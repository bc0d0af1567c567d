//! Empirical checks of the per-round feasibility lemmas against
//! aggregated run statistics.

use serde::{Deserialize, Serialize};

use super::bounds::{matching_collision_bound, packing_rate_horizon, PACKING_FEASIBLE_RATE};
use super::estimate::TrialStats;

/// One audited round: empirical rate of feasible tentative selections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub round: usize,
    /// Runs with a tentative selection in this round.
    pub tentative: usize,
    /// Of those, runs whose selection passed the feasibility test.
    pub feasible: usize,
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / tentative)`.
    pub std_err: f64,
    pub bound: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateAudit {
    pub rows: Vec<RateRow>,
    pub violations: usize,
}

impl RateAudit {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn audit(
    stats: &TrialStats,
    bound: impl Fn(usize) -> Option<f64>,
    violated: impl Fn(f64, f64, f64) -> bool,
) -> RateAudit {
    let rows: Vec<RateRow> = stats
        .per_round
        .iter()
        .filter(|t| t.tentative > 0)
        .filter_map(|t| {
            let bound = bound(t.round)?;
            let rate = t.feasible as f64 / t.tentative as f64;
            let std_err = (rate * (1.0 - rate) / t.tentative as f64).sqrt();
            Some(RateRow {
                round: t.round,
                tentative: t.tentative,
                feasible: t.feasible,
                rate,
                std_err,
                bound,
                violation: violated(rate, std_err, bound),
            })
        })
        .collect();
    let violations = rows.iter().filter(|r| r.violation).count();
    RateAudit { rows, violations }
}

/// Tentative edges should be feasible with probability at least
/// `(⌈n/2⌉ - 1)/(ℓ - 1)`; a round is a violation when the empirical rate
/// plus three standard errors is still below that.
pub fn check_matching_collision_rate(stats: &TrialStats, n: usize) -> RateAudit {
    audit(
        stats,
        |round| Some(matching_collision_bound(n, round)),
        |rate, se, bound| rate + 3.0 * se < bound,
    )
}

/// For rounds `ℓ <= n/(4eψ)` tentative selections should be feasible with
/// probability at least 1/2; a round is a violation when the empirical rate
/// is below `1/2 - 3·stderr`.
pub fn check_packing_feasible_rate(stats: &TrialStats, n: usize, psi: f64) -> RateAudit {
    let horizon = packing_rate_horizon(n, psi);
    audit(
        stats,
        |round| (round as f64 <= horizon).then_some(PACKING_FEASIBLE_RATE),
        |rate, se, bound| rate < bound - 3.0 * se,
    )
}
