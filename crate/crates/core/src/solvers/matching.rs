//! Offline solvers for submodular bipartite matching on the revealed subgraph.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BipartiteGraph, Edge};
use crate::oracle::{Accumulator, ValueOracle};

/// Matchings a brute-force search may visit, bounded through the complete
/// bipartite graph on the same vertex counts.
pub const BRUTE_FORCE_MATCHING_BUDGET: u128 = 2_000_000;

/// Graph restricted to the online vertices revealed so far, plus the oracle
/// over edge subsets.
#[derive(Debug, Clone, Copy)]
pub struct MatchingSolverInput<'a> {
    pub graph: &'a BipartiteGraph,
    pub oracle: &'a ValueOracle,
    /// Revealed online vertices, in any order.
    pub revealed: &'a [usize],
}

impl<'a> MatchingSolverInput<'a> {
    pub fn new(graph: &'a BipartiteGraph, oracle: &'a ValueOracle, revealed: &'a [usize]) -> Result<Self> {
        if oracle.n() != graph.edges().len() {
            return Err(Error::input("edge oracle does not match the edge list"));
        }
        for &l in revealed {
            if l >= graph.l_size() {
                return Err(Error::IndexOutOfRange {
                    index: l,
                    n: graph.l_size(),
                });
            }
        }
        Ok(MatchingSolverInput {
            graph,
            oracle,
            revealed,
        })
    }

    fn sorted_vertices(&self) -> Vec<usize> {
        let mut v = self.revealed.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Edge indices of the revealed subgraph, ordered by `(l, r)`.
    pub fn candidate_edges(&self) -> Vec<usize> {
        self.sorted_vertices()
            .into_iter()
            .flat_map(|l| self.graph.incident(l).iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchingSolver {
    BruteForce,
    Greedy,
}

impl MatchingSolver {
    /// Edge indices of a matching, sorted by `(l, r)`.
    pub fn solve(&self, input: &MatchingSolverInput<'_>) -> Result<Vec<usize>> {
        match self {
            MatchingSolver::BruteForce => brute_force_matching(input),
            MatchingSolver::Greedy => greedy_matching(input),
        }
    }

    /// Approximation factor the solver guarantees.
    pub fn alpha(&self) -> f64 {
        match self {
            MatchingSolver::BruteForce => 1.0,
            MatchingSolver::Greedy => 1.0 / 3.0,
        }
    }
}

/// Greedy: add the non-conflicting edge of largest positive marginal gain
/// until none is left; ties to the smallest `(l, r)`.
pub fn greedy_matching(input: &MatchingSolverInput<'_>) -> Result<Vec<usize>> {
    let graph = input.graph;
    let candidates = input.candidate_edges();
    let mut l_used = vec![false; graph.l_size()];
    let mut r_used = vec![false; graph.r_size()];
    let mut acc = input.oracle.accumulator();
    loop {
        let mut best: Option<(f64, usize)> = None;
        for &e in &candidates {
            let Edge { l, r } = graph.edge(e);
            if l_used[l] || r_used[r] {
                continue;
            }
            let g = acc.gain(e);
            if g > 0.0 && best.is_none_or(|(bg, _)| g > bg) {
                best = Some((g, e));
            }
        }
        let Some((_, e)) = best else { break };
        let Edge { l, r } = graph.edge(e);
        l_used[l] = true;
        r_used[r] = true;
        acc.push(e);
    }
    let mut out = acc.items().to_vec();
    graph.sort_edges(&mut out);
    Ok(out)
}

/// Number of matchings of the complete bipartite graph `K_{a,b}`, saturating.
pub fn complete_matching_count(a: usize, b: usize) -> u128 {
    // sum_k C(a,k) C(b,k) k!
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for k in 0..=a.min(b) {
        total = total.saturating_add(term);
        term = term.saturating_mul(((a - k) * (b - k)) as u128) / (k as u128 + 1);
    }
    total
}

/// Exact maximum-value matching; ties go to the lexicographically smallest
/// sorted edge list.
pub fn brute_force_matching(input: &MatchingSolverInput<'_>) -> Result<Vec<usize>> {
    let graph = input.graph;
    let vertices: Vec<usize> = input
        .sorted_vertices()
        .into_iter()
        .filter(|&l| !graph.incident(l).is_empty())
        .collect();
    let mut offline: Vec<usize> = vertices
        .iter()
        .flat_map(|&l| graph.incident(l).iter().map(|&e| graph.edge(e).r))
        .collect();
    offline.sort_unstable();
    offline.dedup();
    let size = complete_matching_count(vertices.len(), offline.len());
    if size > BRUTE_FORCE_MATCHING_BUDGET {
        return Err(Error::Budget {
            what: "brute-force matching search",
            size,
            limit: BRUTE_FORCE_MATCHING_BUDGET,
        });
    }

    struct Search<'g, 'o> {
        graph: &'g BipartiteGraph,
        vertices: Vec<usize>,
        r_used: Vec<bool>,
        acc: Accumulator<'o>,
        best_value: f64,
        best: Vec<Edge>,
        best_ids: Vec<usize>,
    }

    impl Search<'_, '_> {
        fn visit(&mut self, pos: usize) {
            if pos == self.vertices.len() {
                let v = self.acc.value();
                // edges are pushed in ascending l, so acc.items() is sorted
                if v > self.best_value
                    || (v == self.best_value
                        && self
                            .acc
                            .items()
                            .iter()
                            .map(|&e| self.graph.edge(e))
                            .lt(self.best.iter().copied()))
                {
                    self.best_value = v;
                    self.best_ids = self.acc.items().to_vec();
                    self.best = self.best_ids.iter().map(|&e| self.graph.edge(e)).collect();
                }
                return;
            }
            let l = self.vertices[pos];
            for i in 0..self.graph.incident(l).len() {
                let e = self.graph.incident(l)[i];
                let r = self.graph.edge(e).r;
                if self.r_used[r] {
                    continue;
                }
                self.r_used[r] = true;
                self.acc.push(e);
                self.visit(pos + 1);
                self.acc.pop();
                self.r_used[r] = false;
            }
            self.visit(pos + 1);
        }
    }

    let mut search = Search {
        graph,
        vertices,
        r_used: vec![false; graph.r_size()],
        acc: input.oracle.accumulator(),
        best_value: f64::NEG_INFINITY,
        best: Vec::new(),
        best_ids: Vec::new(),
    };
    search.visit(0);
    Ok(search.best_ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Family;

    fn modular_graph(l: usize, r: usize, weighted: &[(usize, usize, f64)]) -> (BipartiteGraph, ValueOracle) {
        let edges = weighted.iter().map(|&(l, r, _)| Edge { l, r }).collect();
        let g = BipartiteGraph::new(l, r, edges).unwrap();
        let o = ValueOracle::new(Family::EdgeValued {
            inner: Box::new(Family::Modular {
                weights: weighted.iter().map(|w| w.2).collect(),
            }),
        })
        .unwrap();
        (g, o)
    }

    #[test]
    fn single_edge() {
        let (g, o) = modular_graph(1, 1, &[(0, 0, 2.0)]);
        let input = MatchingSolverInput::new(&g, &o, &[0]).unwrap();
        assert_eq!(greedy_matching(&input).unwrap(), vec![0]);
        assert_eq!(brute_force_matching(&input).unwrap(), vec![0]);
    }

    #[test]
    fn shared_offline_vertex() {
        let (g, o) = modular_graph(2, 1, &[(0, 0, 5.0), (1, 0, 3.0)]);
        let input = MatchingSolverInput::new(&g, &o, &[1, 0]).unwrap();
        assert_eq!(greedy_matching(&input).unwrap(), vec![0]);
    }

    #[test]
    fn two_by_two_assignment() {
        let (g, o) = modular_graph(2, 2, &[(0, 0, 3.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)]);
        let input = MatchingSolverInput::new(&g, &o, &[0, 1]).unwrap();
        let m = brute_force_matching(&input).unwrap();
        assert_eq!(m, vec![0, 3]);
        assert_eq!(o.eval(&m).unwrap(), 6.0);
    }

    #[test]
    fn empty_edge_set() {
        // no revealed vertex has an edge
        let (g, o) = modular_graph(2, 2, &[(0, 0, 1.0)]);
        let input = MatchingSolverInput::new(&g, &o, &[1]).unwrap();
        assert!(brute_force_matching(&input).unwrap().is_empty());
        assert!(greedy_matching(&input).unwrap().is_empty());
    }

    #[test]
    fn disjoint_edges_agree() {
        let (g, o) = modular_graph(3, 3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 0.5)]);
        let input = MatchingSolverInput::new(&g, &o, &[2, 0, 1]).unwrap();
        assert_eq!(greedy_matching(&input).unwrap(), brute_force_matching(&input).unwrap());
        assert_eq!(greedy_matching(&input).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn tie_goes_to_smaller_edge_list() {
        let (g, o) = modular_graph(2, 1, &[(1, 0, 2.0), (0, 0, 2.0)]);
        let input = MatchingSolverInput::new(&g, &o, &[0, 1]).unwrap();
        assert_eq!(brute_force_matching(&input).unwrap(), vec![1]);
        assert_eq!(greedy_matching(&input).unwrap(), vec![1]);
    }

    #[test]
    fn matching_counts() {
        assert_eq!(complete_matching_count(2, 2), 7);
        assert_eq!(complete_matching_count(12, 5), 169_021);
        assert_eq!(complete_matching_count(8, 8), 1_441_729);
        assert!(complete_matching_count(10, 10) > BRUTE_FORCE_MATCHING_BUDGET);
    }
}
