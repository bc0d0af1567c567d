//! Closed-form competitive-ratio bounds and per-round probability bounds.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest greedy k-secretary ratio over `k >= 2` as stated in the paper's
/// prose; reported next to the formula value.
pub const GREEDY_STATED_MINIMUM: f64 = 0.177;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    KSecretary,
    GreedyKSecretary,
    Matching,
    Packing,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::KSecretary => "k-secretary",
            BoundKind::GreedyKSecretary => "greedy-k-secretary",
            BoundKind::Matching => "matching",
            BoundKind::Packing => "packing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub capacity_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub column_sparsity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub known: Option<bool>,
    /// The bound without lower-order terms.
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    /// The bound with its additive error term at `n`; may be negative.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_adjusted: Option<f64>,
    /// Constant quoted by the paper, where it differs from the formula.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stated: Option<f64>,
    /// True when the guarantee only holds up to an unspecified constant.
    pub caveat: bool,
}

impl BoundReport {
    fn new(kind: BoundKind, value: f64) -> Self {
        BoundReport {
            kind,
            k: None,
            alpha: None,
            capacity_ratio: None,
            column_sparsity: None,
            known: None,
            value,
            n: None,
            n_adjusted: None,
            stated: None,
            caveat: false,
        }
    }

    /// Adds the bound including its `n`-dependent error term. Packing bounds
    /// have none and are returned unchanged.
    pub fn with_n(mut self, n: usize) -> Self {
        let nf = n as f64;
        let adjusted = match self.kind {
            BoundKind::KSecretary => {
                let (k, alpha) = (self.k.unwrap_or(1) as f64, self.alpha.unwrap_or(1.0));
                Some(self.value - alpha * 6.0 * k * k / nf)
            }
            BoundKind::GreedyKSecretary => {
                let k = self.k.unwrap_or(1);
                let kf = k as f64;
                Some((1.0 - stirling_term(k) - 6.0 * E * kf * kf / nf) * greedy_average_alpha(k) / E)
            }
            BoundKind::Matching => Some(self.value - 5.0 / nf),
            BoundKind::Packing => None,
        };
        if adjusted.is_some() {
            self.n = Some(n);
            self.n_adjusted = adjusted;
        }
        self
    }
}

/// `sqrt(k-1) / ((k+1) sqrt(2π))`
fn stirling_term(k: usize) -> f64 {
    ((k - 1) as f64).sqrt() / ((k + 1) as f64 * (2.0 * PI).sqrt())
}

/// Average of the greedy stage factors over the second phase:
/// `(1 + 1/(2e³) - 3/(2e) - (e-1)/(e²k)) / (1 - 1/e)`.
fn greedy_average_alpha(k: usize) -> f64 {
    let k = k as f64;
    (1.0 + 0.5 / E.powi(3) - 1.5 / E - (E - 1.0) / (E * E * k)) / (1.0 - 1.0 / E)
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    Ok(())
}

fn check_alpha(alpha: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero {
        (0.0..=1.0).contains(&alpha)
    } else {
        alpha > 0.0 && alpha <= 1.0
    };
    if !ok {
        return Err(Error::input(format!("alpha = {alpha} is out of range")));
    }
    Ok(())
}

/// `(α/e)(1 - sqrt(k-1)/((k+1) sqrt(2π)))`
pub fn bound_k_secretary(k: usize, alpha: f64) -> Result<BoundReport> {
    check_k(k)?;
    check_alpha(alpha, false)?;
    let mut r = BoundReport::new(BoundKind::KSecretary, alpha / E * (1.0 - stirling_term(k)));
    r.k = Some(k);
    r.alpha = Some(alpha);
    Ok(r)
}

/// `((1 + 1/(2e³) - 3/(2e) - (e-1)/(e²k)) / (e-1)) (1 - sqrt(k-1)/((k+1) sqrt(2π)))`
pub fn bound_greedy_k_secretary(k: usize) -> Result<BoundReport> {
    check_k(k)?;
    let value = greedy_average_alpha(k) / E * (1.0 - stirling_term(k));
    let mut r = BoundReport::new(BoundKind::GreedyKSecretary, value);
    r.k = Some(k);
    r.stated = Some(GREEDY_STATED_MINIMUM);
    Ok(r)
}

/// `α/4`
pub fn bound_matching(alpha: f64) -> Result<BoundReport> {
    check_alpha(alpha, true)?;
    let mut r = BoundReport::new(BoundKind::Matching, alpha / 4.0);
    r.alpha = Some(alpha);
    Ok(r)
}

/// `α d^(-2/(B-1))` for unknown `B, d`, `α d^(-1/(B-1))` when known; both
/// only up to a constant factor.
pub fn bound_packing(alpha: f64, capacity_ratio: f64, column_sparsity: usize, known: bool) -> Result<BoundReport> {
    check_alpha(alpha, false)?;
    if capacity_ratio.is_nan() || capacity_ratio < 2.0 {
        return Err(Error::input(format!(
            "capacity ratio B = {capacity_ratio} must be at least 2"
        )));
    }
    if column_sparsity == 0 {
        return Err(Error::input("column sparsity d must be at least 1"));
    }
    let exponent = if known { 1.0 } else { 2.0 } / (capacity_ratio - 1.0);
    let mut r = BoundReport::new(BoundKind::Packing, alpha * (column_sparsity as f64).powf(-exponent));
    r.alpha = Some(alpha);
    r.capacity_ratio = Some(capacity_ratio);
    r.column_sparsity = Some(column_sparsity);
    r.known = Some(known);
    r.caveat = true;
    Ok(r)
}

/// Greedy's guarantee in round `ℓ` relative to the best `k`-subset of the
/// whole input: `1 - ℓ/(en) - 1/(ek)`.
pub fn greedy_stage_alpha(round: usize, n: usize, k: usize) -> f64 {
    1.0 - round as f64 / (E * n as f64) - 1.0 / (E * k as f64)
}

/// Lower bound on the probability that a tentative edge in round `ℓ` is
/// feasible: `(⌈n/2⌉ - 1)/(ℓ - 1)`, capped at 1.
pub fn matching_collision_bound(n: usize, round: usize) -> f64 {
    if round <= 1 {
        return 1.0;
    }
    let sample = n.div_ceil(2).saturating_sub(1) as f64;
    (sample / (round - 1) as f64).min(1.0)
}

/// Last round `n/(4eψ)` covered by the packing feasibility lemma.
pub fn packing_rate_horizon(n: usize, psi: f64) -> f64 {
    n as f64 / (4.0 * E * psi)
}

/// Probability floor for the packing feasibility lemma.
pub const PACKING_FEASIBLE_RATE: f64 = 0.5;
