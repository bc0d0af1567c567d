//! Monte Carlo estimation of empirical competitive ratios.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{bound_greedy_k_secretary, bound_k_secretary, bound_matching, bound_packing, BoundReport};
use crate::error::{Error, Result};
use crate::instance::{Instance, PackingInstance};
use crate::online::{
    packing_violation, run_k_secretary, run_matching, run_packing, run_packing_known, ArrivalOrder, RunRecord,
    K_SECRETARY_P, MATCHING_P,
};
use crate::oracle::{
    multilinear_closed_form, multilinear_exact, multilinear_mc, FractionalPoint, EXACT_MULTILINEAR_MAX_N,
};
use crate::rng::{child_seed, substream};
use crate::solvers::cardinality::{subsets_up_to, BRUTE_FORCE_SUBSET_BUDGET};
use crate::solvers::{
    brute_force_cardinality, brute_force_matching, modular_top_k, CardinalityKind, CardinalitySolver, ContinuousGreedy,
    MatchingSolver, MatchingSolverInput, PackingPolytope,
};

/// Largest `n` for exhaustive enumeration of arrival orders.
pub const EXHAUSTIVE_ORDERS_MAX_N: usize = 8;
/// Largest packing instance whose integral optimum is brute-forced.
pub const INTEGRAL_PACKING_MAX_N: usize = 12;
/// Samples for Monte Carlo evaluation of the fractional benchmark.
pub const BENCHMARK_MC_SAMPLES: usize = 10_000;
/// Default number of trials.
pub const DEFAULT_TRIALS: usize = 1000;

const ORDER_STREAM: u64 = u64::MAX;
const BENCHMARK_STREAM: u64 = u64::MAX;

fn default_k_p() -> f64 {
    K_SECRETARY_P
}

fn default_matching_p() -> f64 {
    MATCHING_P
}

/// Online algorithm and offline subroutine for an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum AlgorithmConfig {
    KSecretary {
        solver: CardinalityKind,
        #[serde(default = "default_k_p")]
        p: f64,
    },
    Matching {
        solver: MatchingSolver,
        #[serde(default = "default_matching_p")]
        p: f64,
    },
    Packing {
        #[serde(default)]
        solver: ContinuousGreedy,
        /// Use the variant with known `B` and `d`.
        #[serde(default)]
        known: bool,
    },
}

impl AlgorithmConfig {
    pub fn k_secretary(solver: CardinalityKind) -> Self {
        AlgorithmConfig::KSecretary {
            solver,
            p: K_SECRETARY_P,
        }
    }

    pub fn matching(solver: MatchingSolver) -> Self {
        AlgorithmConfig::Matching { solver, p: MATCHING_P }
    }

    pub fn packing(solver: ContinuousGreedy, known: bool) -> Self {
        AlgorithmConfig::Packing { solver, known }
    }

    /// Runs the algorithm once; `seed` drives the packing rounding streams.
    pub fn run(&self, instance: &Instance, order: &ArrivalOrder, seed: u64) -> Result<RunRecord> {
        match (self, instance) {
            (AlgorithmConfig::KSecretary { solver, p }, Instance::Cardinality(c)) => {
                let solver = CardinalitySolver { kind: *solver, k: c.k };
                run_k_secretary(&c.oracle, c.k, &solver, *p, order)
            }
            (AlgorithmConfig::Matching { solver, p }, Instance::Matching(m)) => run_matching(m, solver, *p, order),
            (AlgorithmConfig::Packing { solver, known }, Instance::Packing(pk)) => {
                if *known {
                    run_packing_known(pk, solver, order, seed)
                } else {
                    run_packing(pk, solver, order, seed)
                }
            }
            _ => Err(Error::input(format!(
                "algorithm {} does not apply to a {} instance",
                self.name(),
                instance.variant()
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::KSecretary { .. } => "k-secretary",
            AlgorithmConfig::Matching { .. } => "matching",
            AlgorithmConfig::Packing { known: false, .. } => "packing",
            AlgorithmConfig::Packing { known: true, .. } => "packing-known",
        }
    }

    /// Theoretical bounds that apply to this configuration on `instance`.
    pub fn bounds(&self, instance: &Instance) -> Result<Vec<BoundReport>> {
        let n = instance.n();
        Ok(match (self, instance) {
            (AlgorithmConfig::KSecretary { solver, .. }, Instance::Cardinality(c)) => {
                let k = c.k.max(1);
                match solver {
                    CardinalityKind::Greedy => vec![bound_greedy_k_secretary(k)?.with_n(n)],
                    _ => vec![bound_k_secretary(k, 1.0)?.with_n(n)],
                }
            }
            (AlgorithmConfig::Matching { solver, .. }, Instance::Matching(_)) => {
                vec![bound_matching(solver.alpha())?.with_n(n)]
            }
            (AlgorithmConfig::Packing { known, .. }, Instance::Packing(p)) => {
                let (big_b, d) = (p.capacity_ratio(), p.column_sparsity());
                if big_b >= 2.0 && d >= 1 {
                    vec![bound_packing(1.0 - 1.0 / std::f64::consts::E, big_b, d, *known)?]
                } else {
                    Vec::new()
                }
            }
            _ => return Err(Error::input("algorithm does not match the instance variant")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkKind {
    /// Exhaustive search over feasible solutions.
    IntegralBruteForce,
    /// Exact top-k selection on a modular objective.
    IntegralModular,
    /// `F` at the continuous-greedy point of the unscaled polytope.
    FractionalContinuousGreedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    /// The value ratios are taken against.
    pub value: f64,
    pub kind: BenchmarkKind,
    /// Integral optimum, when computed.
    pub integral: Option<f64>,
    /// Fractional benchmark, when computed.
    pub fractional: Option<f64>,
}

/// `F(x)`: closed form where available, exact enumeration for `n <= 20`,
/// Monte Carlo otherwise.
pub fn multilinear_value(oracle: &crate::oracle::ValueOracle, x: &FractionalPoint, seed: u64) -> Result<f64> {
    if let Some(v) = multilinear_closed_form(oracle, x)? {
        return Ok(v);
    }
    if oracle.n() <= EXACT_MULTILINEAR_MAX_N {
        return multilinear_exact(oracle, x);
    }
    Ok(multilinear_mc(oracle, x, BENCHMARK_MC_SAMPLES, seed)?.estimate)
}

/// Best value of a 0-1 packing solution, by exhaustive search.
pub fn brute_force_packing(instance: &PackingInstance) -> Result<(Vec<usize>, f64)> {
    let n = instance.n();
    if n > INTEGRAL_PACKING_MAX_N {
        return Err(Error::Budget {
            what: "integral packing optimum",
            size: n as u128,
            limit: INTEGRAL_PACKING_MAX_N as u128,
        });
    }
    let mut acc = instance.oracle.accumulator();
    let mut load = vec![0.0; instance.m()];
    let mut best = (Vec::new(), 0.0);
    fn visit(
        inst: &PackingInstance,
        j: usize,
        acc: &mut crate::oracle::Accumulator<'_>,
        load: &mut [f64],
        best: &mut (Vec<usize>, f64),
    ) {
        if acc.value() > best.1 {
            *best = (acc.items().to_vec(), acc.value());
        }
        for i in j..inst.n() {
            let fits = load
                .iter()
                .zip(inst.a())
                .zip(inst.b())
                .all(|((l, row), &b)| l + row[i] <= b);
            if !fits {
                continue;
            }
            let saved = load.to_vec();
            for (l, row) in load.iter_mut().zip(inst.a()) {
                *l += row[i];
            }
            acc.push(i);
            visit(inst, i + 1, acc, load, best);
            acc.pop();
            load.copy_from_slice(&saved);
        }
    }
    visit(instance, 0, &mut acc, &mut load, &mut best);
    Ok(best)
}

/// Offline benchmark for ratio estimation.
pub fn offline_opt_benchmark(instance: &Instance, solver: &ContinuousGreedy, seed: u64) -> Result<Benchmark> {
    match instance {
        Instance::Cardinality(c) => {
            let all: Vec<usize> = (0..c.n()).collect();
            let within_budget = subsets_up_to(c.n(), c.k) <= BRUTE_FORCE_SUBSET_BUDGET;
            let (set, kind) = match c.oracle.family().base() {
                crate::oracle::Family::Modular { .. } if !within_budget => {
                    (modular_top_k(&c.oracle, &all, c.k)?, BenchmarkKind::IntegralModular)
                }
                _ => (
                    brute_force_cardinality(&c.oracle, &all, c.k)?,
                    BenchmarkKind::IntegralBruteForce,
                ),
            };
            let value = c.oracle.eval(&set)?;
            Ok(Benchmark {
                value,
                kind,
                integral: Some(value),
                fractional: None,
            })
        }
        Instance::Matching(m) => {
            let all: Vec<usize> = (0..m.n()).collect();
            let input = MatchingSolverInput::new(&m.graph, &m.oracle, &all)?;
            let value = m.oracle.eval(&brute_force_matching(&input)?)?;
            Ok(Benchmark {
                value,
                kind: BenchmarkKind::IntegralBruteForce,
                integral: Some(value),
                fractional: None,
            })
        }
        Instance::Packing(p) => {
            let all: Vec<usize> = (0..p.n()).collect();
            let polytope = PackingPolytope::new(p.a(), p.b(), 1.0, &all)?;
            let x = solver.solve(&p.oracle, &polytope, child_seed(seed, 0))?;
            let fractional = multilinear_value(&p.oracle, &x, child_seed(seed, 1))?;
            let integral = if p.n() <= INTEGRAL_PACKING_MAX_N {
                Some(brute_force_packing(p)?.1)
            } else {
                None
            };
            Ok(Benchmark {
                value: fractional,
                kind: BenchmarkKind::FractionalContinuousGreedy,
                integral,
                fractional: Some(fractional),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TrialMode {
    /// Uniform random orders, one per trial.
    Sampled { trials: usize },
    /// Every arrival order once (`n <= 8`).
    Exhaustive,
}

/// Per-round counts over all trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundTally {
    pub round: usize,
    pub tentative: usize,
    pub feasible: usize,
    pub accepted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: usize,
    pub mean_value: f64,
    pub mean_ratio: f64,
    pub std_err: f64,
    pub ci95: [f64; 2],
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub opt_value: f64,
    pub benchmark: BenchmarkKind,
    #[serde(default)]
    pub integral_opt: Option<f64>,
    /// Accepted selections per round divided by the number of trials.
    pub per_round_acceptance_rate: Vec<f64>,
    pub per_round: Vec<RoundTally>,
    /// Runs whose record breaks a trace invariant or the constraint.
    pub invariant_violations: usize,
}

struct Outcome {
    value: f64,
    flags: Vec<u8>,
    violation: bool,
}

const TENTATIVE: u8 = 1;
const FEASIBLE: u8 = 2;
const ACCEPTED: u8 = 4;

fn audit(instance: &Instance, record: &RunRecord) -> bool {
    if record.check_consistency().is_err() {
        return true;
    }
    match instance {
        Instance::Cardinality(c) => record.selection.len() > c.k,
        Instance::Matching(m) => !m.graph.is_matching(&record.selection),
        Instance::Packing(p) => packing_violation(p, record).is_some(),
    }
}

fn outcome(instance: &Instance, record: &RunRecord) -> Outcome {
    let flags = record
        .rounds
        .iter()
        .map(|r| {
            (if r.tentative { TENTATIVE } else { 0 })
                | (if r.feasible == Some(true) { FEASIBLE } else { 0 })
                | (if r.accepted { ACCEPTED } else { 0 })
        })
        .collect();
    Outcome {
        value: record.value,
        flags,
        violation: audit(instance, record),
    }
}

/// Arrival order and rounding seed of trial `t`.
pub fn trial_inputs(n: usize, master_seed: u64, t: usize) -> (ArrivalOrder, u64) {
    let seed = child_seed(master_seed, t as u64);
    (ArrivalOrder::random(n, &mut substream(seed, ORDER_STREAM)), seed)
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_orders(n: usize) -> Result<Vec<ArrivalOrder>> {
    if n > EXHAUSTIVE_ORDERS_MAX_N {
        return Err(Error::Budget {
            what: "exhaustive arrival orders",
            size: (1..=n as u128).product(),
            limit: (1..=EXHAUSTIVE_ORDERS_MAX_N as u128).product(),
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![ArrivalOrder::new(perm.clone())?];
    loop {
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return Ok(out);
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap_or(i);
        perm.swap(i - 1, j);
        perm[i..].reverse();
        out.push(ArrivalOrder::new(perm.clone())?);
    }
}

/// Runs the configured algorithm on many arrival orders and summarizes the
/// ratio `v(ALG) / benchmark`. The result depends only on the inputs, not on
/// thread scheduling.
pub fn estimate_ratio(
    instance: &Instance,
    config: &AlgorithmConfig,
    mode: TrialMode,
    master_seed: u64,
) -> Result<TrialStats> {
    let solver = match config {
        AlgorithmConfig::Packing { solver, .. } => *solver,
        _ => ContinuousGreedy::default(),
    };
    let benchmark = offline_opt_benchmark(instance, &solver, child_seed(master_seed, BENCHMARK_STREAM))?;
    let n = instance.n();
    let outcomes: Vec<Outcome> = match mode {
        TrialMode::Sampled { trials } => {
            if trials == 0 {
                return Err(Error::input("trials must be at least 1"));
            }
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let (order, seed) = trial_inputs(n, master_seed, t);
                    config.run(instance, &order, seed).map(|r| outcome(instance, &r))
                })
                .collect::<Result<_>>()?
        }
        TrialMode::Exhaustive => {
            let orders = all_orders(n)?;
            orders
                .into_par_iter()
                .enumerate()
                .map(|(t, order)| {
                    let seed = child_seed(master_seed, t as u64);
                    config.run(instance, &order, seed).map(|r| outcome(instance, &r))
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(summarize(&outcomes, &benchmark, n))
}

fn summarize(outcomes: &[Outcome], benchmark: &Benchmark, n: usize) -> TrialStats {
    let trials = outcomes.len();
    let tf = trials as f64;
    let ratio = |v: f64| {
        if benchmark.value > 0.0 {
            v / benchmark.value
        } else {
            1.0
        }
    };
    let ratios: Vec<f64> = outcomes.iter().map(|o| ratio(o.value)).collect();
    let mean_ratio = ratios.iter().sum::<f64>() / tf;
    let mean_value = outcomes.iter().map(|o| o.value).sum::<f64>() / tf;
    let std_err = if trials > 1 {
        let var = ratios.iter().map(|r| (r - mean_ratio).powi(2)).sum::<f64>() / (tf - 1.0);
        (var / tf).sqrt()
    } else {
        0.0
    };
    let mut per_round: Vec<RoundTally> = (1..=n)
        .map(|round| RoundTally {
            round,
            ..RoundTally::default()
        })
        .collect();
    for o in outcomes {
        for (tally, &f) in per_round.iter_mut().zip(&o.flags) {
            tally.tentative += usize::from(f & TENTATIVE != 0);
            tally.feasible += usize::from(f & FEASIBLE != 0);
            tally.accepted += usize::from(f & ACCEPTED != 0);
        }
    }
    TrialStats {
        trials,
        mean_value,
        mean_ratio,
        std_err,
        ci95: [mean_ratio - 1.96 * std_err, mean_ratio + 1.96 * std_err],
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        opt_value: benchmark.value,
        benchmark: benchmark.kind,
        integral_opt: benchmark.integral,
        per_round_acceptance_rate: per_round.iter().map(|t| t.accepted as f64 / tf).collect(),
        per_round,
        invariant_violations: outcomes.iter().filter(|o| o.violation).count(),
    }
}
