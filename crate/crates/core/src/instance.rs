//! Problem instances for the three online variants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::ValueOracle;

/// Cardinality-constrained instance: pick at most `k` items.
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityInstance {
    pub oracle: ValueOracle,
    pub k: usize,
}

impl CardinalityInstance {
    pub fn new(oracle: ValueOracle, k: usize) -> Self {
        CardinalityInstance { oracle, k }
    }

    pub fn n(&self) -> usize {
        self.oracle.n()
    }
}

/// An edge `(l, r)` between online vertex `l` and offline vertex `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub l: usize,
    pub r: usize,
}

/// Bipartite graph `G = (L ∪ R, E)`; edges are addressed by their index in
/// `edges`, which is also the ground set of the edge-valued oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    l_size: usize,
    r_size: usize,
    edges: Vec<Edge>,
    by_l: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(l_size: usize, r_size: usize, edges: Vec<Edge>) -> Result<Self> {
        if l_size == 0 {
            return Err(Error::validation("l_size", "need at least one online vertex"));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, e) in edges.iter().enumerate() {
            if e.l >= l_size {
                return Err(Error::validation(
                    format!("edges[{i}]"),
                    format!("online vertex {} out of range (l_size = {l_size})", e.l),
                ));
            }
            if e.r >= r_size {
                return Err(Error::validation(
                    format!("edges[{i}]"),
                    format!("offline vertex {} out of range (r_size = {r_size})", e.r),
                ));
            }
            if !seen.insert(*e) {
                return Err(Error::validation(
                    format!("edges[{i}]"),
                    format!("duplicate edge ({}, {})", e.l, e.r),
                ));
            }
        }
        let mut by_l = vec![Vec::new(); l_size];
        for (i, e) in edges.iter().enumerate() {
            by_l[e.l].push(i);
        }
        for list in &mut by_l {
            list.sort_by_key(|&i| edges[i].r);
        }
        Ok(BipartiteGraph {
            l_size,
            r_size,
            edges,
            by_l,
        })
    }

    pub fn l_size(&self) -> usize {
        self.l_size
    }

    pub fn r_size(&self) -> usize {
        self.r_size
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> Edge {
        self.edges[index]
    }

    /// Edge indices incident to online vertex `l`, ordered by `r`.
    pub fn incident(&self, l: usize) -> &[usize] {
        &self.by_l[l]
    }

    /// True when no two of the given edges share an endpoint.
    pub fn is_matching(&self, edge_ids: &[usize]) -> bool {
        let mut l_used = vec![false; self.l_size];
        let mut r_used = vec![false; self.r_size];
        for &i in edge_ids {
            let e = self.edges[i];
            if l_used[e.l] || r_used[e.r] {
                return false;
            }
            l_used[e.l] = true;
            r_used[e.r] = true;
        }
        true
    }

    /// Sort edge indices by `(l, r)`.
    pub fn sort_edges(&self, ids: &mut [usize]) {
        ids.sort_by_key(|&i| self.edges[i]);
    }
}

/// Bipartite matching instance with a value oracle over edge subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingInstance {
    pub graph: BipartiteGraph,
    pub oracle: ValueOracle,
}

impl MatchingInstance {
    pub fn new(graph: BipartiteGraph, oracle: ValueOracle) -> Result<Self> {
        if oracle.n() != graph.edges().len() {
            return Err(Error::validation(
                "oracle",
                format!(
                    "edge oracle has {} items but the graph has {} edges",
                    oracle.n(),
                    graph.edges().len()
                ),
            ));
        }
        Ok(MatchingInstance { graph, oracle })
    }

    /// Number of online vertices.
    pub fn n(&self) -> usize {
        self.graph.l_size()
    }
}

/// Linear packing instance: `A y <= b` with `a_ij >= 0`, `y ∈ {0,1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingInstance {
    pub oracle: ValueOracle,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl PackingInstance {
    pub fn new(oracle: ValueOracle, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let n = oracle.n();
        if a.len() != b.len() {
            return Err(Error::validation(
                "b",
                format!("{} capacities for {} constraint rows", b.len(), a.len()),
            ));
        }
        for (i, row) in a.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(
                    format!("a[{i}]"),
                    format!("row has {} entries, expected n = {n}", row.len()),
                ));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::validation(
                        format!("a[{i}][{j}]"),
                        "nonnegative coefficients required",
                    ));
                }
            }
        }
        for (i, &v) in b.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation(
                    format!("b[{i}]"),
                    "capacities must be finite and nonnegative",
                ));
            }
        }
        Ok(PackingInstance { oracle, a, b })
    }

    pub fn n(&self) -> usize {
        self.oracle.n()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `B = min_i b_i / max_j a_ij`; rows without nonzero entries impose no
    /// limit, so an all-zero matrix has `B = ∞`.
    pub fn capacity_ratio(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .filter_map(|(row, &bi)| {
                let max = row.iter().copied().fold(0.0, f64::max);
                (max > 0.0).then(|| bi / max)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `d`: the largest number of nonzero entries in any column.
    pub fn column_sparsity(&self) -> usize {
        (0..self.n())
            .map(|j| self.a.iter().filter(|row| row[j] != 0.0).count())
            .max()
            .unwrap_or(0)
    }

    /// `ψ = d^(1/(B-1))`.
    pub fn psi(&self) -> f64 {
        psi(self.capacity_ratio(), self.column_sparsity())
    }

    /// Total load `A x` of a 0-1 selection, accumulated in the given order.
    pub fn load(&self, items: &[usize]) -> Vec<f64> {
        let mut load = vec![0.0; self.m()];
        for &j in items {
            for (l, row) in load.iter_mut().zip(&self.a) {
                *l += row[j];
            }
        }
        load
    }

    /// True when the 0-1 selection satisfies every constraint exactly.
    pub fn is_feasible(&self, items: &[usize]) -> bool {
        self.load(items).iter().zip(&self.b).all(|(l, b)| l <= b)
    }
}

/// `ψ = d^(1/(B-1))` from the capacity ratio and column sparsity.
pub fn psi(capacity_ratio: f64, column_sparsity: usize) -> f64 {
    (column_sparsity as f64).powf(1.0 / (capacity_ratio - 1.0))
}

/// Any of the three problem variants.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Cardinality(CardinalityInstance),
    Matching(MatchingInstance),
    Packing(PackingInstance),
}

impl Instance {
    /// Number of online arrivals.
    pub fn n(&self) -> usize {
        match self {
            Instance::Cardinality(c) => c.n(),
            Instance::Matching(m) => m.n(),
            Instance::Packing(p) => p.n(),
        }
    }

    pub fn oracle(&self) -> &ValueOracle {
        match self {
            Instance::Cardinality(c) => &c.oracle,
            Instance::Matching(m) => &m.oracle,
            Instance::Packing(p) => &p.oracle,
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            Instance::Cardinality(_) => Variant::Cardinality,
            Instance::Matching(_) => Variant::Matching,
            Instance::Packing(_) => Variant::Packing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Cardinality,
    Matching,
    Packing,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Cardinality => "cardinality",
            Variant::Matching => "matching",
            Variant::Packing => "packing",
        })
    }
}
