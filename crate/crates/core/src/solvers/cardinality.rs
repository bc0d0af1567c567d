//! Offline solvers for `max v(T)` subject to `|T| <= k`, `T ⊆ L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{Accumulator, Family, ValueOracle};

/// Candidate subsets a brute-force cardinality search may visit.
pub const BRUTE_FORCE_SUBSET_BUDGET: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CardinalityKind {
    BruteForce,
    Greedy,
    /// Exact for modular objectives only.
    ModularTopK,
}

/// Offline black box for the cardinality variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalitySolver {
    pub kind: CardinalityKind,
    pub k: usize,
}

impl CardinalitySolver {
    pub fn brute_force(k: usize) -> Self {
        CardinalitySolver {
            kind: CardinalityKind::BruteForce,
            k,
        }
    }

    pub fn modular_top_k(k: usize) -> Self {
        CardinalitySolver {
            kind: CardinalityKind::ModularTopK,
            k,
        }
    }

    pub fn greedy(k: usize) -> Self {
        CardinalitySolver {
            kind: CardinalityKind::Greedy,
            k,
        }
    }

    /// Solve on the item set `l`; the result is sorted and depends only on
    /// the set `l`, not on the order it is listed in.
    pub fn solve(&self, oracle: &ValueOracle, l: &[usize]) -> Result<Vec<usize>> {
        match self.kind {
            CardinalityKind::BruteForce => brute_force_cardinality(oracle, l, self.k),
            CardinalityKind::Greedy => greedy_cardinality(oracle, l, self.k),
            CardinalityKind::ModularTopK => modular_top_k(oracle, l, self.k),
        }
    }

    /// Approximation factor the solver guarantees.
    pub fn alpha(&self) -> f64 {
        match self.kind {
            CardinalityKind::BruteForce | CardinalityKind::ModularTopK => 1.0,
            CardinalityKind::Greedy => 1.0 - (-1f64).exp(),
        }
    }
}

/// `sum_{i<=k} C(n, i)`, saturating.
pub fn subsets_up_to(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=k.min(n) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    total
}

/// Exact `argmax_{T ⊆ L, |T| <= k} v(T)`; ties go to the lexicographically
/// smallest sorted index list.
pub fn brute_force_cardinality(oracle: &ValueOracle, l: &[usize], k: usize) -> Result<Vec<usize>> {
    let items = oracle.canonical(l)?;
    let size = subsets_up_to(items.len(), k);
    if size > BRUTE_FORCE_SUBSET_BUDGET {
        return Err(Error::Budget {
            what: "brute-force cardinality search",
            size,
            limit: BRUTE_FORCE_SUBSET_BUDGET,
        });
    }
    let mut acc = oracle.accumulator();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    // Subsets are visited in lexicographic order of their sorted index
    // lists, so keeping the first maximum implements the tie rule.
    fn visit(acc: &mut Accumulator<'_>, items: &[usize], start: usize, k: usize, best: &mut (f64, Vec<usize>)) {
        if acc.value() > best.0 {
            *best = (acc.value(), acc.items().to_vec());
        }
        if acc.len() == k {
            return;
        }
        for i in start..items.len() {
            acc.push(items[i]);
            visit(acc, items, i + 1, k, best);
            acc.pop();
        }
    }
    visit(&mut acc, &items, 0, k, &mut best);
    Ok(best.1)
}

/// Picks in greedy order: repeatedly the item of largest marginal gain,
/// ties to the smallest index.
pub fn greedy_order(oracle: &ValueOracle, l: &[usize], k: usize) -> Result<Vec<usize>> {
    let items = oracle.canonical(l)?;
    let mut acc = oracle.accumulator();
    let mut picked = Vec::with_capacity(k.min(items.len()));
    while picked.len() < k {
        let mut best: Option<(f64, usize)> = None;
        for &j in &items {
            if acc.contains(j) {
                continue;
            }
            let g = acc.gain(j);
            if best.is_none_or(|(bg, _)| g > bg) {
                best = Some((g, j));
            }
        }
        let Some((_, j)) = best else { break };
        acc.push(j);
        picked.push(j);
    }
    Ok(picked)
}

/// Nemhauser-Wolsey greedy: `min(k, |L|)` items, returned sorted.
pub fn greedy_cardinality(oracle: &ValueOracle, l: &[usize], k: usize) -> Result<Vec<usize>> {
    let mut picked = greedy_order(oracle, l, k)?;
    picked.sort_unstable();
    Ok(picked)
}

/// The `k` positive-weight items of largest weight, ties to the smaller index.
/// Optimal on modular oracles; unlike brute force it never adds zero-weight
/// items.
pub fn modular_top_k(oracle: &ValueOracle, l: &[usize], k: usize) -> Result<Vec<usize>> {
    let Family::Modular { weights } = oracle.family().base() else {
        return Err(Error::input(format!(
            "top-k solver needs a modular oracle, got {}",
            oracle.family().tag()
        )));
    };
    let mut items: Vec<usize> = oracle.canonical(l)?.into_iter().filter(|&j| weights[j] > 0.0).collect();
    items.sort_by(|&i, &j| weights[j].total_cmp(&weights[i]).then(i.cmp(&j)));
    items.truncate(k);
    items.sort_unstable();
    Ok(items)
}

/// Result of comparing greedy with `k` picks to the best `k'`-subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageCheck {
    pub greedy_value: f64,
    pub opt_kprime_value: f64,
    /// `1 - exp(-k/k')`
    pub bound: f64,
    pub holds: bool,
}

/// Greedy with `k` picks against the brute-force optimum with `k'` picks.
pub fn greedy_stage_guarantee_check(oracle: &ValueOracle, l: &[usize], k: usize, k_prime: usize) -> Result<StageCheck> {
    if k_prime == 0 {
        return Err(Error::input("k' must be at least 1"));
    }
    let greedy_value = oracle.eval(&greedy_cardinality(oracle, l, k)?)?;
    let opt_kprime_value = oracle.eval(&brute_force_cardinality(oracle, l, k_prime)?)?;
    let bound = stage_bound(k, k_prime);
    Ok(StageCheck {
        greedy_value,
        opt_kprime_value,
        bound,
        holds: greedy_value >= bound * opt_kprime_value - 1e-9 * opt_kprime_value.max(1.0),
    })
}

/// `1 - exp(-k/k')`.
pub fn stage_bound(k: usize, k_prime: usize) -> f64 {
    1.0 - (-(k as f64) / k_prime as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc_coverage() -> ValueOracle {
        // items cover {a,b,c}, {a,b}, {c,d}
        ValueOracle::coverage(vec![vec![0, 1, 2], vec![0, 1], vec![2, 3]], vec![1.0; 4]).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        let m = ValueOracle::modular(vec![5.0, 3.0, 2.0]).unwrap();
        let s = brute_force_cardinality(&m, &[0, 1, 2], 2).unwrap();
        assert_eq!(s, vec![0, 1]);
        assert_eq!(m.eval(&s).unwrap(), 8.0);

        let c = ValueOracle::coverage(vec![vec![0, 1], vec![1, 2]], vec![1.0; 3]).unwrap();
        assert_eq!(brute_force_cardinality(&c, &[1, 0], 1).unwrap(), vec![0]);

        assert!(brute_force_cardinality(&m, &[0, 1, 2], 0).unwrap().is_empty());
    }

    #[test]
    fn brute_force_prefers_smaller_tie() {
        // item 1 adds nothing, so {0} and {0,1} tie; {0} is lexicographically first
        let m = ValueOracle::modular(vec![4.0, 0.0]).unwrap();
        assert_eq!(brute_force_cardinality(&m, &[0, 1], 2).unwrap(), vec![0]);
    }

    #[test]
    fn greedy_examples() {
        let m = ValueOracle::modular(vec![5.0, 3.0, 2.0]).unwrap();
        assert_eq!(greedy_cardinality(&m, &[2, 1, 0], 2).unwrap(), vec![0, 1]);

        let c = abc_coverage();
        assert_eq!(greedy_order(&c, &[0, 1, 2], 2).unwrap(), vec![0, 2]);
        assert_eq!(c.eval(&[0, 2]).unwrap(), 4.0);
    }

    #[test]
    fn greedy_stops_when_l_exhausted() {
        let m = ValueOracle::modular(vec![5.0, 3.0, 2.0]).unwrap();
        assert_eq!(greedy_cardinality(&m, &[1, 2], 5).unwrap(), vec![1, 2]);
        assert!(greedy_cardinality(&m, &[], 2).unwrap().is_empty());
    }

    #[test]
    fn budget_enforced() {
        let m = ValueOracle::modular(vec![1.0; 60]).unwrap();
        let all: Vec<usize> = (0..60).collect();
        assert!(matches!(
            brute_force_cardinality(&m, &all, 5),
            Err(Error::Budget { .. })
        ));
        assert_eq!(subsets_up_to(4, 2), 1 + 4 + 6);
        assert_eq!(subsets_up_to(3, 9), 8);
    }

    #[test]
    fn top_k_matches_brute_force() {
        use rand::Rng;
        let mut rng = crate::rng::substream(5, 0);
        for _ in 0..50 {
            let w: Vec<f64> = (0..9).map(|_| rng.random_range(0..4) as f64).collect();
            let m = ValueOracle::modular(w).unwrap();
            let l: Vec<usize> = (0..9).filter(|_| rng.random_bool(0.7)).collect();
            for k in 0..4 {
                let top = m.eval(&modular_top_k(&m, &l, k).unwrap()).unwrap();
                assert_eq!(top, m.eval(&brute_force_cardinality(&m, &l, k).unwrap()).unwrap());
            }
        }
        assert!(modular_top_k(&abc_coverage(), &[0], 1).is_err());
    }

    #[test]
    fn stage_bounds() {
        assert!((stage_bound(2, 2) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!((stage_bound(3, 1) - 0.950_212_931_632_136).abs() < 1e-12);
        let c = abc_coverage();
        let r = greedy_stage_guarantee_check(&c, &[0, 1, 2], 2, 1).unwrap();
        assert!(r.holds);
        assert_eq!(r.opt_kprime_value, 3.0);
        assert_eq!(r.greedy_value, 4.0);
    }
}
