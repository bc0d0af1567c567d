//! The three online algorithms, run against a fixed arrival order with a
//! per-round trace.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{MatchingInstance, PackingInstance, Variant};
use crate::oracle::{FractionalPoint, ValueOracle};
use crate::rng::{child_seed, random_permutation, substream};
use crate::solvers::{CardinalitySolver, ContinuousGreedy, MatchingSolver, MatchingSolverInput, PackingPolytope};

/// Default sample fraction of the k-secretary algorithm.
pub const K_SECRETARY_P: f64 = 1.0 / std::f64::consts::E;
/// Sample fraction of the matching algorithm.
pub const MATCHING_P: f64 = 0.5;

/// A permutation of `0..n`; `perm[t]` arrives in round `t + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ArrivalOrder {
    perm: Vec<usize>,
}

impl ArrivalOrder {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for (t, &j) in perm.iter().enumerate() {
            if j >= n {
                return Err(Error::validation(
                    format!("order[{t}]"),
                    format!("item {j} out of range (n = {n})"),
                ));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::validation(
                    format!("order[{t}]"),
                    format!("item {j} appears twice"),
                ));
            }
        }
        Ok(ArrivalOrder { perm })
    }

    pub fn identity(n: usize) -> Self {
        ArrivalOrder { perm: (0..n).collect() }
    }

    /// Uniform random order by Fisher-Yates.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        ArrivalOrder {
            perm: random_permutation(n, rng),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// Items revealed after `round` rounds.
    pub fn prefix(&self, round: usize) -> &[usize] {
        &self.perm[..round]
    }
}

impl TryFrom<Vec<usize>> for ArrivalOrder {
    type Error = Error;

    fn try_from(perm: Vec<usize>) -> Result<Self> {
        ArrivalOrder::new(perm)
    }
}

impl From<ArrivalOrder> for Vec<usize> {
    fn from(order: ArrivalOrder) -> Self {
        order.perm
    }
}

/// Offline solution computed in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum RoundSolution {
    /// `S^(ℓ)`, sorted item indices.
    Items(Vec<usize>),
    /// `M^(ℓ)`, edge indices sorted by `(l, r)`.
    Edges(Vec<usize>),
    /// `x̃^(ℓ)`.
    Fractional(FractionalPoint),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundEntry {
    /// 1-based round index `ℓ`.
    pub round: usize,
    /// Item, online vertex or variable arriving in this round.
    pub arrival: usize,
    /// `None` during the sampling phase.
    pub solution: Option<RoundSolution>,
    /// Item (cardinality, packing) or edge index (matching) considered in
    /// this round, if any.
    pub selected: Option<usize>,
    pub tentative: bool,
    /// Outcome of the feasibility test; `None` without a tentative selection.
    pub feasible: Option<bool>,
    pub accepted: bool,
}

impl RoundEntry {
    fn observe(round: usize, arrival: usize) -> Self {
        RoundEntry {
            round,
            arrival,
            solution: None,
            selected: None,
            tentative: false,
            feasible: None,
            accepted: false,
        }
    }
}

/// Trace of one online execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub variant: Variant,
    pub order: ArrivalOrder,
    /// Number of observe-only rounds, `⌈pn⌉ - 1`.
    pub sample_rounds: usize,
    pub rounds: Vec<RoundEntry>,
    /// Accepted items or edge indices, sorted.
    pub selection: Vec<usize>,
    pub value: f64,
    /// Seed of the per-round random streams (packing only).
    pub seed: Option<u64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RunRecord {
    pub fn accepted_count(&self) -> usize {
        self.rounds.iter().filter(|r| r.accepted).count()
    }

    /// Checks the trace invariants: acceptance implies a passed test on a
    /// tentative selection, nothing is accepted while sampling, and the
    /// selection is exactly the set of accepted selections.
    pub fn check_consistency(&self) -> Result<()> {
        let mut union = Vec::new();
        for r in &self.rounds {
            let location = format!("rounds[{}]", r.round - 1);
            if r.accepted && !(r.tentative && r.feasible == Some(true)) {
                return Err(Error::validation(
                    location,
                    "accepted without a passed feasibility test",
                ));
            }
            if r.tentative != r.feasible.is_some() {
                return Err(Error::validation(
                    location,
                    "feasibility outcome without tentative selection",
                ));
            }
            if r.round <= self.sample_rounds && (r.tentative || r.solution.is_some()) {
                return Err(Error::validation(location, "selection during the sampling phase"));
            }
            if r.accepted {
                union.extend(r.selected);
            }
        }
        union.sort_unstable();
        if union != self.selection {
            return Err(Error::validation("selection", "does not match the accepted rounds"));
        }
        Ok(())
    }
}

/// `⌈pn⌉ - 1`, the number of observe-only rounds.
pub fn sample_rounds(p: f64, n: usize) -> usize {
    ((p * n as f64).ceil() as usize).saturating_sub(1).min(n)
}

fn check_order(order: &ArrivalOrder, n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::input(format!(
            "arrival order has {} entries but the instance has n = {n}",
            order.len()
        )));
    }
    Ok(())
}

fn check_fraction(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::input(format!("sample fraction {p} is outside (0, 1)")));
    }
    Ok(())
}

/// Submodular k-secretary: observe the first `⌈pn⌉ - 1` items, then accept
/// an arriving item if it is in the offline solution on the revealed prefix
/// and fewer than `k` items have been accepted.
pub fn run_k_secretary(
    oracle: &ValueOracle,
    k: usize,
    solver: &CardinalitySolver,
    p: f64,
    order: &ArrivalOrder,
) -> Result<RunRecord> {
    let n = oracle.n();
    check_order(order, n)?;
    check_fraction(p)?;
    let sample = sample_rounds(p, n);
    let mut rounds = Vec::with_capacity(n);
    let mut accepted = Vec::new();
    for (t, &j) in order.as_slice().iter().enumerate() {
        let round = t + 1;
        let mut entry = RoundEntry::observe(round, j);
        if round > sample {
            let s = solver
                .solve(oracle, order.prefix(round))
                .map_err(|e| e.in_round(round))?;
            if s.binary_search(&j).is_ok() {
                let feasible = accepted.len() < k;
                entry.selected = Some(j);
                entry.tentative = true;
                entry.feasible = Some(feasible);
                if feasible {
                    entry.accepted = true;
                    accepted.push(j);
                }
            }
            entry.solution = Some(RoundSolution::Items(s));
        }
        rounds.push(entry);
    }
    accepted.sort_unstable();
    let value = oracle.eval(&accepted)?;
    Ok(RunRecord {
        variant: Variant::Cardinality,
        order: order.clone(),
        sample_rounds: sample,
        rounds,
        selection: accepted,
        value,
        seed: None,
        warnings: Vec::new(),
    })
}

/// Submodular bipartite online matching: observe `⌈pn⌉ - 1` online vertices,
/// then add the arriving vertex's edge in the offline matching of the
/// revealed subgraph if it keeps the selection a matching.
pub fn run_matching(
    instance: &MatchingInstance,
    solver: &MatchingSolver,
    p: f64,
    order: &ArrivalOrder,
) -> Result<RunRecord> {
    let graph = &instance.graph;
    let n = graph.l_size();
    check_order(order, n)?;
    check_fraction(p)?;
    let sample = sample_rounds(p, n);
    let mut rounds = Vec::with_capacity(n);
    let mut accepted = Vec::new();
    let mut r_used = vec![false; graph.r_size()];
    for (t, &u) in order.as_slice().iter().enumerate() {
        let round = t + 1;
        let mut entry = RoundEntry::observe(round, u);
        if round > sample {
            let input = MatchingSolverInput::new(graph, &instance.oracle, order.prefix(round))?;
            let m = solver.solve(&input).map_err(|e| e.in_round(round))?;
            if let Some(&e) = m.iter().find(|&&e| graph.edge(e).l == u) {
                let r = graph.edge(e).r;
                // u arrives once, so only the offline endpoint can collide
                let feasible = !r_used[r];
                entry.selected = Some(e);
                entry.tentative = true;
                entry.feasible = Some(feasible);
                if feasible {
                    r_used[r] = true;
                    entry.accepted = true;
                    accepted.push(e);
                }
            }
            entry.solution = Some(RoundSolution::Edges(m));
        }
        rounds.push(entry);
    }
    graph.sort_edges(&mut accepted);
    let value = instance.oracle.eval(&accepted)?;
    accepted.sort_unstable();
    Ok(RunRecord {
        variant: Variant::Matching,
        order: order.clone(),
        sample_rounds: sample,
        rounds,
        selection: accepted,
        value,
        seed: None,
        warnings: Vec::new(),
    })
}

/// `p = 1 - (1/(2e)) (1/(2d))^(1/(B-1))`, clamped to `[0, 1]`.
pub fn known_sampling_fraction(capacity_ratio: f64, column_sparsity: usize) -> f64 {
    let d = column_sparsity.max(1) as f64;
    let p = 1.0 - (0.5 / std::f64::consts::E) * (0.5 / d).powf(1.0 / (capacity_ratio - 1.0));
    p.clamp(0.0, 1.0)
}

/// Random stream used for rounding in round `round`.
pub fn rounding_stream(seed: u64, round: usize) -> crate::rng::StreamRng {
    substream(seed, 2 * round as u64)
}

/// Seed handed to the offline solver in round `round`.
pub fn solver_seed(seed: u64, round: usize) -> u64 {
    child_seed(seed, 2 * round as u64 + 1)
}

/// Linear packing with unknown `B` and `d`: every round solves the scaled
/// fractional problem on the revealed variables, rounds the arriving
/// coordinate and keeps it if `A x <= b` still holds.
pub fn run_packing(
    instance: &PackingInstance,
    solver: &ContinuousGreedy,
    order: &ArrivalOrder,
    seed: u64,
) -> Result<RunRecord> {
    let mut warnings = Vec::new();
    if instance.b().iter().any(|&b| b < 2.0) {
        warnings.push("some capacity b_i is below 2; the analysis assumes b_i >= 2".to_string());
    }
    packing_rounds(instance, solver, order, seed, 0, warnings)
}

/// Linear packing with known `B` and `d`: as [`run_packing`] but the first
/// `⌈pn⌉ - 1` rounds only observe, with `p` from [`known_sampling_fraction`].
pub fn run_packing_known(
    instance: &PackingInstance,
    solver: &ContinuousGreedy,
    order: &ArrivalOrder,
    seed: u64,
) -> Result<RunRecord> {
    let big_b = instance.capacity_ratio();
    let d = instance.column_sparsity();
    let mut warnings = Vec::new();
    if big_b < 2.0 {
        warnings.push(format!(
            "capacity ratio B = {big_b} is below 2; the guarantee assumes B >= 2"
        ));
    }
    let p = known_sampling_fraction(big_b, d);
    let sample = sample_rounds(p, instance.n());
    packing_rounds(instance, solver, order, seed, sample, warnings)
}

fn packing_rounds(
    instance: &PackingInstance,
    solver: &ContinuousGreedy,
    order: &ArrivalOrder,
    seed: u64,
    sample: usize,
    warnings: Vec<String>,
) -> Result<RunRecord> {
    let n = instance.n();
    check_order(order, n)?;
    let (a, b) = (instance.a(), instance.b());
    let mut load = vec![0.0; instance.m()];
    let mut rounds = Vec::with_capacity(n);
    let mut accepted = Vec::new();
    for (t, &j) in order.as_slice().iter().enumerate() {
        let round = t + 1;
        let mut entry = RoundEntry::observe(round, j);
        if round > sample {
            let scale = round as f64 / n as f64;
            let polytope = PackingPolytope::new(a, b, scale, order.prefix(round))?;
            let x = solver
                .solve(&instance.oracle, &polytope, solver_seed(seed, round))
                .map_err(|e| e.in_round(round))?;
            let draw: f64 = rounding_stream(seed, round).random();
            if draw < x.as_slice()[j] {
                let feasible = load.iter().zip(a).zip(b).all(|((l, row), &bi)| l + row[j] <= bi);
                entry.selected = Some(j);
                entry.tentative = true;
                entry.feasible = Some(feasible);
                if feasible {
                    for (l, row) in load.iter_mut().zip(a) {
                        *l += row[j];
                    }
                    entry.accepted = true;
                    accepted.push(j);
                }
            }
            entry.solution = Some(RoundSolution::Fractional(x));
        }
        rounds.push(entry);
    }
    accepted.sort_unstable();
    let value = instance.oracle.eval(&accepted)?;
    Ok(RunRecord {
        variant: Variant::Packing,
        order: order.clone(),
        sample_rounds: sample,
        rounds,
        selection: accepted,
        value,
        seed: Some(seed),
        warnings,
    })
}

/// Replays the accepted items of a packing run in round order and reports the
/// first round after which `A x <= b` fails, if any.
pub fn packing_violation(instance: &PackingInstance, record: &RunRecord) -> Option<usize> {
    let mut load = vec![0.0; instance.m()];
    for r in &record.rounds {
        if r.accepted {
            let Some(j) = r.selected else { return Some(r.round) };
            for (l, row) in load.iter_mut().zip(instance.a()) {
                *l += row[j];
            }
        }
        if load.iter().zip(instance.b()).any(|(l, b)| l > b) {
            return Some(r.round);
        }
    }
    None
}
