//! Value oracles for monotone submodular set functions.
//!
//! A [`ValueOracle`] wraps one of a few concrete function [`Family`] variants
//! over the ground set `0..n`. Set evaluation is memoized on the sorted index
//! list of the subset. Solvers that need many evaluations of nested sets use an
//! [`Accumulator`] instead, which updates the value incrementally as items are
//! pushed and popped.

mod checks;
mod multilinear;

pub use checks::{
    check_monotone, check_submodular, CheckMode, Property, PropertyReport, Witness, DEFAULT_CHECK_TRIALS,
    EXHAUSTIVE_CHECK_MAX_N,
};
pub use multilinear::{
    gradient, multilinear_closed_form, multilinear_exact, multilinear_mc, FractionalPoint, GainMethod, McEstimate,
    EXACT_MULTILINEAR_MAX_N,
};

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Memo entries kept before the table is flushed.
const MEMO_CAPACITY: usize = 1 << 20;

/// Largest ground set accepted by the explicit table family.
pub const TABLE_MAX_N: usize = 20;

/// The universe `0..n` of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("ground set must contain at least one item"));
        }
        Ok(GroundSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn check(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, n: self.n })
        }
    }

    pub fn items(&self) -> std::ops::Range<usize> {
        0..self.n
    }
}

/// Concave shape applied to a nonnegative weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConcaveShape {
    /// `sqrt(sum)`
    Sqrt,
    /// `min(c, sum)`
    Cap { c: f64 },
}

impl ConcaveShape {
    #[inline]
    pub fn apply(&self, sum: f64) -> f64 {
        match *self {
            ConcaveShape::Sqrt => sum.sqrt(),
            ConcaveShape::Cap { c } => sum.min(c),
        }
    }
}

/// Concrete set-function families with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Weighted coverage: item `j` covers the universe elements `covers[j]`;
    /// the value of a set is the total weight of the union it covers.
    Coverage {
        covers: Vec<Vec<usize>>,
        element_weights: Vec<f64>,
    },
    /// Additive with nonnegative per-item weights.
    Modular { weights: Vec<f64> },
    /// A concave shape applied to an additive weight sum.
    ConcaveOverModular { weights: Vec<f64>, shape: ConcaveShape },
    /// A family over the edge indices of a bipartite graph.
    EdgeValued { inner: Box<Family> },
    /// Explicit value table indexed by subset bitmask. Used for crafted
    /// oracles, which need not be monotone or submodular.
    Table { values: Vec<f64> },
}

impl Family {
    /// Ground-set size implied by the parameters.
    pub fn ground_size(&self) -> usize {
        match self {
            Family::Coverage { covers, .. } => covers.len(),
            Family::Modular { weights } => weights.len(),
            Family::ConcaveOverModular { weights, .. } => weights.len(),
            Family::EdgeValued { inner } => inner.ground_size(),
            Family::Table { values } => values.len().trailing_zeros() as usize,
        }
    }

    /// Short tag used in file formats and reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Coverage { .. } => "coverage",
            Family::Modular { .. } => "modular",
            Family::ConcaveOverModular { .. } => "concave-over-modular",
            Family::EdgeValued { .. } => "edge-valued",
            Family::Table { .. } => "table",
        }
    }

    /// The family that actually computes values (unwraps `EdgeValued`).
    pub fn base(&self) -> &Family {
        match self {
            Family::EdgeValued { inner } => inner.base(),
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_at("oracle")
    }

    fn validate_at(&self, loc: &str) -> Result<()> {
        fn weights_ok(loc: &str, field: &str, w: &[f64]) -> Result<()> {
            for (i, &x) in w.iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::validation(
                        format!("{loc}.{field}[{i}]"),
                        "weights must be finite and nonnegative",
                    ));
                }
            }
            Ok(())
        }
        match self {
            Family::Coverage {
                covers,
                element_weights,
            } => {
                weights_ok(loc, "element_weights", element_weights)?;
                for (j, cov) in covers.iter().enumerate() {
                    let mut seen = vec![false; element_weights.len()];
                    for (p, &u) in cov.iter().enumerate() {
                        if u >= element_weights.len() {
                            return Err(Error::validation(
                                format!("{loc}.covers[{j}][{p}]"),
                                format!(
                                    "element {u} out of range for universe of size {}",
                                    element_weights.len()
                                ),
                            ));
                        }
                        if seen[u] {
                            return Err(Error::validation(
                                format!("{loc}.covers[{j}][{p}]"),
                                format!("element {u} listed twice"),
                            ));
                        }
                        seen[u] = true;
                    }
                }
            }
            Family::Modular { weights } => weights_ok(loc, "weights", weights)?,
            Family::ConcaveOverModular { weights, shape } => {
                weights_ok(loc, "weights", weights)?;
                if let ConcaveShape::Cap { c } = shape {
                    if !c.is_finite() || *c < 0.0 {
                        return Err(Error::validation(
                            format!("{loc}.shape.c"),
                            "cap must be finite and nonnegative",
                        ));
                    }
                }
            }
            Family::EdgeValued { inner } => {
                if matches!(**inner, Family::EdgeValued { .. }) {
                    return Err(Error::validation(
                        format!("{loc}.inner"),
                        "edge-valued families cannot be nested",
                    ));
                }
                inner.validate_at(&format!("{loc}.inner"))?;
            }
            Family::Table { values } => {
                let len = values.len();
                if len < 2 || !len.is_power_of_two() || len > 1 << TABLE_MAX_N {
                    return Err(Error::validation(
                        format!("{loc}.values"),
                        format!("table length must be 2^n with 1 <= n <= {TABLE_MAX_N}, got {len}"),
                    ));
                }
                for (i, v) in values.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::validation(format!("{loc}.values[{i}]"), "values must be finite"));
                    }
                }
                if values[0] != 0.0 {
                    return Err(Error::validation(
                        format!("{loc}.values[0]"),
                        "the empty set must have value 0",
                    ));
                }
            }
        }
        if self.ground_size() == 0 {
            return Err(Error::validation(loc, "ground set must contain at least one item"));
        }
        Ok(())
    }
}

/// Black-box set function `v: 2^U -> R>=0` with a memo table.
///
/// The memo is keyed by the sorted, deduplicated index list of the subset
/// and is safe to share between threads; concurrent inserts of the same key
/// always write the same value.
pub struct ValueOracle {
    family: Family,
    ground: GroundSet,
    memo: RwLock<HashMap<Box<[u32]>, f64>>,
    misses: AtomicU64,
}

impl std::fmt::Debug for ValueOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValueOracle")
            .field("family", &self.family.tag())
            .field("n", &self.ground.len())
            .field("evals", &self.eval_count())
            .finish()
    }
}

impl Clone for ValueOracle {
    fn clone(&self) -> Self {
        ValueOracle {
            family: self.family.clone(),
            ground: self.ground,
            memo: RwLock::new(HashMap::new()),
            misses: AtomicU64::new(0),
        }
    }
}

impl PartialEq for ValueOracle {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}

impl ValueOracle {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        let ground = GroundSet::new(family.ground_size())?;
        Ok(ValueOracle {
            family,
            ground,
            memo: RwLock::new(HashMap::new()),
            misses: AtomicU64::new(0),
        })
    }

    pub fn coverage(covers: Vec<Vec<usize>>, element_weights: Vec<f64>) -> Result<Self> {
        Self::new(Family::Coverage {
            covers,
            element_weights,
        })
    }

    pub fn modular(weights: Vec<f64>) -> Result<Self> {
        Self::new(Family::Modular { weights })
    }

    pub fn concave_over_modular(weights: Vec<f64>, shape: ConcaveShape) -> Result<Self> {
        Self::new(Family::ConcaveOverModular { weights, shape })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        Self::new(Family::Table { values })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn n(&self) -> usize {
        self.ground.len()
    }

    /// Number of evaluations that missed the memo.
    pub fn eval_count(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    /// Sorted, deduplicated copy of `set` after range checks.
    pub fn canonical(&self, set: &[usize]) -> Result<Vec<usize>> {
        for &j in set {
            self.ground.check(j)?;
        }
        let mut key = set.to_vec();
        key.sort_unstable();
        key.dedup();
        Ok(key)
    }

    /// `v(S)`, memoized.
    pub fn eval(&self, set: &[usize]) -> Result<f64> {
        let key = self.canonical(set)?;
        let memo_key: Box<[u32]> = key.iter().map(|&j| j as u32).collect();
        if let Some(&v) = self.memo.read().expect("memo poisoned").get(&memo_key) {
            return Ok(v);
        }
        let value = self.value_of_sorted(&key);
        self.misses.fetch_add(1, Ordering::Relaxed);
        let mut memo = self.memo.write().expect("memo poisoned");
        if memo.len() >= MEMO_CAPACITY {
            memo.clear();
        }
        memo.insert(memo_key, value);
        Ok(value)
    }

    /// `v(S)` without touching the memo.
    pub fn eval_uncached(&self, set: &[usize]) -> Result<f64> {
        let key = self.canonical(set)?;
        Ok(self.value_of_sorted(&key))
    }

    /// `v(S + j) - v(S)`; zero when `j` is already in `S`.
    pub fn marginal(&self, j: usize, set: &[usize]) -> Result<f64> {
        self.ground.check(j)?;
        let base = self.canonical(set)?;
        if base.binary_search(&j).is_ok() {
            return Ok(0.0);
        }
        let mut with = base.clone();
        with.push(j);
        Ok(self.eval(&with)? - self.eval(&base)?)
    }

    /// Drop all memo entries.
    pub fn clear_memo(&self) {
        self.memo.write().expect("memo poisoned").clear();
    }

    pub fn accumulator(&self) -> Accumulator<'_> {
        Accumulator::new(&self.family, self.n())
    }

    // Values are always built by pushing items in ascending order so that the
    // memoized path and the enumeration paths agree bit for bit.
    fn value_of_sorted(&self, sorted: &[usize]) -> f64 {
        let mut acc = self.accumulator();
        for &j in sorted {
            acc.push(j);
        }
        acc.value()
    }
}

enum State<'a> {
    Coverage {
        covers: &'a [Vec<usize>],
        weights: &'a [f64],
        counts: Vec<u32>,
    },
    Modular {
        weights: &'a [f64],
    },
    Concave {
        weights: &'a [f64],
        shape: ConcaveShape,
    },
    Table {
        values: &'a [f64],
        mask: usize,
    },
}

/// Incremental evaluator for a growing and shrinking set.
///
/// `push`/`pop` follow stack discipline; `pop` restores the exact previous
/// value, so no floating-point drift accumulates over long enumerations.
pub struct Accumulator<'a> {
    state: State<'a>,
    member: Vec<bool>,
    items: Vec<usize>,
    // (value, additive sum) before each push
    saved: Vec<(f64, f64)>,
    value: f64,
    sum: f64,
}

impl<'a> Accumulator<'a> {
    fn new(family: &'a Family, n: usize) -> Self {
        let state = match family.base() {
            Family::Coverage {
                covers,
                element_weights,
            } => State::Coverage {
                covers,
                weights: element_weights,
                counts: vec![0; element_weights.len()],
            },
            Family::Modular { weights } => State::Modular { weights },
            Family::ConcaveOverModular { weights, shape } => State::Concave { weights, shape: *shape },
            Family::Table { values } => State::Table { values, mask: 0 },
            Family::EdgeValued { .. } => unreachable!("base() unwraps edge-valued"),
        };
        Accumulator {
            state,
            member: vec![false; n],
            items: Vec::new(),
            saved: Vec::new(),
            value: 0.0,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    #[inline]
    pub fn contains(&self, j: usize) -> bool {
        self.member[j]
    }

    /// `v(S + j) - v(S)` for the current set `S`, without modifying it.
    #[inline]
    pub fn gain(&self, j: usize) -> f64 {
        if self.member[j] {
            return 0.0;
        }
        match &self.state {
            State::Coverage {
                covers,
                weights,
                counts,
            } => covers[j].iter().filter(|&&u| counts[u] == 0).map(|&u| weights[u]).sum(),
            State::Modular { weights } => weights[j],
            State::Concave { weights, shape } => shape.apply(self.sum + weights[j]) - self.value,
            State::Table { values, mask } => values[mask | (1 << j)] - values[*mask],
        }
    }

    /// `v(S) - v(S - j)` for a member `j`; zero for non-members.
    #[inline]
    pub fn removal_loss(&self, j: usize) -> f64 {
        if !self.member[j] {
            return 0.0;
        }
        match &self.state {
            State::Coverage {
                covers,
                weights,
                counts,
            } => covers[j].iter().filter(|&&u| counts[u] == 1).map(|&u| weights[u]).sum(),
            State::Modular { weights } => weights[j],
            State::Concave { weights, shape } => self.value - shape.apply(self.sum - weights[j]),
            State::Table { values, mask } => values[*mask] - values[mask & !(1 << j)],
        }
    }

    /// `v(S + j) - v(S - j)`: the gain of `j` whether or not it is present.
    #[inline]
    pub fn contribution(&self, j: usize) -> f64 {
        if self.member[j] {
            self.removal_loss(j)
        } else {
            self.gain(j)
        }
    }

    /// Add `j`; a no-op if already present.
    #[inline]
    pub fn push(&mut self, j: usize) {
        if self.member[j] {
            return;
        }
        self.saved.push((self.value, self.sum));
        self.member[j] = true;
        self.items.push(j);
        match &mut self.state {
            State::Coverage {
                covers,
                weights,
                counts,
            } => {
                for &u in &covers[j] {
                    if counts[u] == 0 {
                        self.value += weights[u];
                    }
                    counts[u] += 1;
                }
            }
            State::Modular { weights } => {
                self.sum += weights[j];
                self.value = self.sum;
            }
            State::Concave { weights, shape } => {
                self.sum += weights[j];
                self.value = shape.apply(self.sum);
            }
            State::Table { values, mask } => {
                *mask |= 1 << j;
                self.value = values[*mask];
            }
        }
    }

    /// Remove the most recently pushed item.
    #[inline]
    pub fn pop(&mut self) -> Option<usize> {
        let j = self.items.pop()?;
        let (value, sum) = self.saved.pop().expect("saved stack in sync with items");
        self.member[j] = false;
        match &mut self.state {
            State::Coverage { covers, counts, .. } => {
                for &u in &covers[j] {
                    counts[u] -= 1;
                }
            }
            State::Table { mask, .. } => *mask &= !(1 << j),
            State::Modular { .. } | State::Concave { .. } => {}
        }
        self.value = value;
        self.sum = sum;
        Some(j)
    }

    pub fn clear(&mut self) {
        while self.pop().is_some() {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // item 0 covers {a, b}, item 1 covers {b, c}
    fn two_item_coverage() -> ValueOracle {
        ValueOracle::coverage(vec![vec![0, 1], vec![1, 2]], vec![1.0; 3]).unwrap()
    }

    #[test]
    fn coverage_eval() {
        let o = two_item_coverage();
        assert_eq!(o.eval(&[0]).unwrap(), 2.0);
        assert_eq!(o.eval(&[0, 1]).unwrap(), 3.0);
        assert_eq!(o.eval(&[]).unwrap(), 0.0);
    }

    #[test]
    fn marginal_examples() {
        let o = two_item_coverage();
        assert_eq!(o.marginal(1, &[0]).unwrap(), 1.0);
        assert_eq!(o.marginal(0, &[0]).unwrap(), 0.0);
        let m = ValueOracle::modular(vec![5.0, 3.0, 2.0]).unwrap();
        assert_eq!(m.marginal(2, &[0, 1]).unwrap(), 2.0);
    }

    #[test]
    fn out_of_range_is_input_error() {
        let o = two_item_coverage();
        assert!(matches!(o.eval(&[2]), Err(Error::IndexOutOfRange { index: 2, n: 2 })));
        assert!(o.marginal(5, &[]).is_err());
        assert!(o.marginal(0, &[9]).is_err());
    }

    #[test]
    fn memo_counts_only_misses() {
        let o = two_item_coverage();
        o.eval(&[1, 0]).unwrap();
        o.eval(&[0, 1]).unwrap();
        o.eval(&[0, 1, 1]).unwrap();
        assert_eq!(o.eval_count(), 1);
        o.eval(&[1]).unwrap();
        assert_eq!(o.eval_count(), 2);
    }

    #[test]
    fn set_semantics() {
        let o = ValueOracle::concave_over_modular(vec![1.0, 4.0, 2.0], ConcaveShape::Sqrt).unwrap();
        let a = o.eval(&[2, 0, 1]).unwrap();
        let b = o.eval_uncached(&[1, 2, 0, 2]).unwrap();
        assert_eq!(a, b);
        assert!((a - 7f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cap_shape() {
        let o = ValueOracle::concave_over_modular(vec![1.0, 4.0, 2.0], ConcaveShape::Cap { c: 5.0 }).unwrap();
        assert_eq!(o.eval(&[0, 1, 2]).unwrap(), 5.0);
        assert_eq!(o.eval(&[0, 2]).unwrap(), 3.0);
    }

    #[test]
    fn accumulator_pop_restores_exactly() {
        let o = ValueOracle::modular(vec![0.1, 0.2, 0.3, 1e-17]).unwrap();
        let mut acc = o.accumulator();
        acc.push(0);
        let v0 = acc.value();
        acc.push(1);
        acc.push(3);
        acc.push(2);
        assert!((acc.gain(2)).abs() == 0.0);
        acc.pop();
        acc.pop();
        acc.pop();
        assert_eq!(acc.value().to_bits(), v0.to_bits());
        assert_eq!(acc.items(), &[0]);
    }

    #[test]
    fn accumulator_gain_matches_eval() {
        let o = ValueOracle::coverage(vec![vec![0, 1, 2], vec![0, 1], vec![2, 3]], vec![1.0, 2.0, 0.5, 4.0]).unwrap();
        let mut acc = o.accumulator();
        acc.push(1);
        for j in 0..3 {
            let expected = o.marginal(j, &[1]).unwrap();
            assert!((acc.gain(j) - expected).abs() < 1e-12);
        }
        acc.push(2);
        let with = o.eval(&[1, 2]).unwrap();
        assert!((acc.removal_loss(2) - (with - o.eval(&[1]).unwrap())).abs() < 1e-12);
        assert!((acc.removal_loss(1) - (with - o.eval(&[2]).unwrap())).abs() < 1e-12);
        assert_eq!(acc.removal_loss(0), 0.0);
    }

    #[test]
    fn validation_errors_name_the_field() {
        let err = ValueOracle::modular(vec![1.0, -2.0]).unwrap_err();
        assert!(err.to_string().contains("oracle.weights[1]"), "{err}");
        let err = ValueOracle::coverage(vec![vec![0, 4]], vec![1.0]).unwrap_err();
        assert!(err.to_string().contains("covers[0][1]"), "{err}");
        let err = ValueOracle::table(vec![1.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("values[0]"), "{err}");
        assert!(ValueOracle::modular(vec![]).is_err());
    }

    #[test]
    fn edge_valued_delegates() {
        let o = ValueOracle::new(Family::EdgeValued {
            inner: Box::new(Family::Modular {
                weights: vec![1.0, 5.0],
            }),
        })
        .unwrap();
        assert_eq!(o.n(), 2);
        assert_eq!(o.eval(&[0, 1]).unwrap(), 6.0);
        assert_eq!(o.family().tag(), "edge-valued");
    }
}
