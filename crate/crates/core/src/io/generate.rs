//! Seeded random instance generators.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::instance_file::{Declared, InstanceFile, INSTANCE_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::instance::{Edge, Variant};
use crate::oracle::{ConcaveShape, Family};
use crate::rng::{seeded, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Coverage,
    Modular,
    ConcaveSqrt,
    ConcaveCap,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "coverage" => FamilyKind::Coverage,
            "modular" => FamilyKind::Modular,
            "concave-sqrt" => FamilyKind::ConcaveSqrt,
            "concave-cap" => FamilyKind::ConcaveCap,
            "edge-valued" => {
                return Err(Error::input(
                    "edge-valued is implied for matching instances; choose the inner family instead",
                ))
            }
            other => return Err(Error::input(format!("unknown family {other:?}"))),
        })
    }
}

/// Size and shape parameters for [`gen_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub variant: Variant,
    /// Items, online vertices or variables.
    pub n: usize,
    pub family: FamilyKind,
    /// Cardinality budget.
    pub k: usize,
    /// Offline vertices (matching).
    pub r_size: usize,
    /// Probability of each online/offline pair being an edge (matching).
    pub edge_probability: f64,
    /// Constraint rows (packing).
    pub m: usize,
    /// Target capacity ratio `B` (packing).
    pub capacity_ratio: f64,
    /// Target column sparsity `d` (packing).
    pub column_sparsity: usize,
}

impl GenSpec {
    pub fn new(variant: Variant, n: usize, family: FamilyKind) -> Self {
        GenSpec {
            variant,
            n,
            family,
            k: 2,
            r_size: n.div_ceil(2).max(1),
            edge_probability: 0.5,
            m: 5,
            capacity_ratio: 2.0,
            column_sparsity: 2,
        }
    }
}

/// Rounds to three decimals so generated files stay readable.
fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn weights(rng: &mut StreamRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| round3(rng.random_range(lo..hi))).collect()
}

/// A random family over `n` items.
pub fn gen_family(kind: FamilyKind, n: usize, rng: &mut StreamRng) -> Family {
    match kind {
        FamilyKind::Coverage => {
            let universe = (2 * n).max(4);
            let covers = (0..n)
                .map(|_| {
                    let size = rng.random_range(1..=3.min(universe));
                    let mut c = sample(rng, universe, size).into_vec();
                    c.sort_unstable();
                    c
                })
                .collect();
            Family::Coverage {
                covers,
                element_weights: weights(rng, universe, 0.5, 1.5),
            }
        }
        FamilyKind::Modular => Family::Modular {
            weights: weights(rng, n, 0.0, 10.0),
        },
        FamilyKind::ConcaveSqrt => Family::ConcaveOverModular {
            weights: weights(rng, n, 0.0, 10.0),
            shape: ConcaveShape::Sqrt,
        },
        FamilyKind::ConcaveCap => {
            let w = weights(rng, n, 0.0, 10.0);
            let c = round3(w.iter().sum::<f64>() / 2.0);
            Family::ConcaveOverModular {
                weights: w,
                shape: ConcaveShape::Cap { c },
            }
        }
    }
}

/// Constraint matrix with exactly `d` nonzeros per column, every nonempty
/// row having maximum entry 1, and `b_i = B`; so the instance has capacity
/// ratio exactly `B` and column sparsity exactly `d`.
pub fn gen_packing_constraints(
    n: usize,
    m: usize,
    capacity_ratio: f64,
    d: usize,
    rng: &mut StreamRng,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if m == 0 || d == 0 || d > m {
        return Err(Error::input(format!(
            "column sparsity d = {d} must be in 1..={m} (m = {m})"
        )));
    }
    if !(capacity_ratio.is_finite() && capacity_ratio > 0.0) {
        return Err(Error::input(format!(
            "capacity ratio {capacity_ratio} must be positive and finite"
        )));
    }
    let mut a = vec![vec![0.0; n]; m];
    for j in 0..n {
        for i in sample(rng, m, d) {
            a[i][j] = round3(rng.random_range(0.1..1.0)).max(0.1);
        }
    }
    for row in &mut a {
        let nonzero: Vec<usize> = (0..n).filter(|&j| row[j] != 0.0).collect();
        if !nonzero.is_empty() {
            row[nonzero[rng.random_range(0..nonzero.len())]] = 1.0;
        }
    }
    Ok((a, vec![capacity_ratio; m]))
}

/// Deterministic random instance for `spec` and `seed`.
pub fn gen_instance(spec: &GenSpec, seed: u64) -> Result<InstanceFile> {
    if spec.n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    let mut rng = seeded(seed);
    let mut file = InstanceFile {
        schema_version: INSTANCE_SCHEMA_VERSION,
        variant: spec.variant,
        n: spec.n,
        oracle: Family::Modular { weights: Vec::new() },
        k: None,
        r_size: None,
        edges: None,
        a: None,
        b: None,
        declared: None,
    };
    match spec.variant {
        Variant::Cardinality => {
            file.oracle = gen_family(spec.family, spec.n, &mut rng);
            file.k = Some(spec.k);
        }
        Variant::Matching => {
            if spec.r_size == 0 {
                return Err(Error::input("r_size must be at least 1"));
            }
            if !(0.0..=1.0).contains(&spec.edge_probability) {
                return Err(Error::input("edge probability must be in [0, 1]"));
            }
            let mut edges = Vec::new();
            for l in 0..spec.n {
                for r in 0..spec.r_size {
                    if rng.random_bool(spec.edge_probability) {
                        edges.push(Edge { l, r });
                    }
                }
            }
            if edges.is_empty() {
                edges.push(Edge { l: 0, r: 0 });
            }
            file.oracle = Family::EdgeValued {
                inner: Box::new(gen_family(spec.family, edges.len(), &mut rng)),
            };
            file.r_size = Some(spec.r_size);
            file.edges = Some(edges);
        }
        Variant::Packing => {
            file.oracle = gen_family(spec.family, spec.n, &mut rng);
            let (a, b) = gen_packing_constraints(spec.n, spec.m, spec.capacity_ratio, spec.column_sparsity, &mut rng)?;
            file.a = Some(a);
            file.b = Some(b);
            file.declared = Some(Declared {
                capacity_ratio: spec.capacity_ratio,
                column_sparsity: spec.column_sparsity,
            });
        }
    }
    // recomputation audit, including the declared packing parameters
    file.to_instance()?;
    Ok(file)
}
