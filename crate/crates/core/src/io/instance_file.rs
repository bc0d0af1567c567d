//! Versioned JSON instance files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    BipartiteGraph, CardinalityInstance, Edge, Instance, MatchingInstance, PackingInstance, Variant,
};
use crate::oracle::{Family, ValueOracle};

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

/// Relative tolerance when comparing a declared capacity ratio with the
/// recomputed one.
const DECLARED_TOLERANCE: f64 = 1e-12;

/// Packing parameters declared by the file author, checked on load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Declared {
    pub capacity_ratio: f64,
    pub column_sparsity: usize,
}

/// On-disk form of an [`Instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub variant: Variant,
    /// Number of online arrivals: items, online vertices or variables.
    pub n: usize,
    pub oracle: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<Edge>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared: Option<Declared>,
}

fn missing(field: &str, variant: Variant) -> Error {
    Error::validation(field, format!("required for a {variant} instance"))
}

fn unexpected(field: &str, variant: Variant) -> Error {
    Error::validation(field, format!("not allowed in a {variant} instance"))
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        let mut file = InstanceFile {
            schema_version: INSTANCE_SCHEMA_VERSION,
            variant: instance.variant(),
            n: instance.n(),
            oracle: instance.oracle().family().clone(),
            k: None,
            r_size: None,
            edges: None,
            a: None,
            b: None,
            declared: None,
        };
        match instance {
            Instance::Cardinality(c) => file.k = Some(c.k),
            Instance::Matching(m) => {
                file.r_size = Some(m.graph.r_size());
                file.edges = Some(m.graph.edges().to_vec());
            }
            Instance::Packing(p) => {
                file.a = Some(p.a().to_vec());
                file.b = Some(p.b().to_vec());
            }
        }
        file
    }

    /// Attach the recomputed `(B, d)` of a packing instance.
    pub fn with_declared(mut self) -> Result<Self> {
        if let Instance::Packing(p) = self.to_instance()? {
            self.declared = Some(Declared {
                capacity_ratio: p.capacity_ratio(),
                column_sparsity: p.column_sparsity(),
            });
        }
        Ok(self)
    }

    /// Validates the file and builds the instance.
    pub fn to_instance(&self) -> Result<Instance> {
        if self.schema_version != INSTANCE_SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!(
                    "unsupported version {} (expected {INSTANCE_SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        let variant = self.variant;
        let edge_valued = matches!(self.oracle, Family::EdgeValued { .. });
        if edge_valued != (variant == Variant::Matching) {
            return Err(Error::validation(
                "oracle.family",
                "edge-valued oracles are required for matching instances and only allowed there",
            ));
        }
        let oracle = ValueOracle::new(self.oracle.clone())?;
        let check_absent = |present: bool, field: &str| {
            if present {
                Err(unexpected(field, variant))
            } else {
                Ok(())
            }
        };
        match variant {
            Variant::Cardinality => {
                check_absent(self.r_size.is_some(), "r_size")?;
                check_absent(self.edges.is_some(), "edges")?;
                check_absent(self.a.is_some(), "a")?;
                check_absent(self.b.is_some(), "b")?;
                check_absent(self.declared.is_some(), "declared")?;
                let k = self.k.ok_or_else(|| missing("k", variant))?;
                self.check_n(oracle.n(), "oracle")?;
                Ok(Instance::Cardinality(CardinalityInstance::new(oracle, k)))
            }
            Variant::Matching => {
                check_absent(self.k.is_some(), "k")?;
                check_absent(self.a.is_some(), "a")?;
                check_absent(self.b.is_some(), "b")?;
                check_absent(self.declared.is_some(), "declared")?;
                let r_size = self.r_size.ok_or_else(|| missing("r_size", variant))?;
                let edges = self.edges.clone().ok_or_else(|| missing("edges", variant))?;
                let graph = BipartiteGraph::new(self.n, r_size, edges)?;
                Ok(Instance::Matching(MatchingInstance::new(graph, oracle)?))
            }
            Variant::Packing => {
                check_absent(self.k.is_some(), "k")?;
                check_absent(self.r_size.is_some(), "r_size")?;
                check_absent(self.edges.is_some(), "edges")?;
                let a = self.a.clone().ok_or_else(|| missing("a", variant))?;
                let b = self.b.clone().ok_or_else(|| missing("b", variant))?;
                self.check_n(oracle.n(), "oracle")?;
                let p = PackingInstance::new(oracle, a, b)?;
                if let Some(d) = self.declared {
                    let big_b = p.capacity_ratio();
                    let same = if big_b.is_finite() {
                        (d.capacity_ratio - big_b).abs() <= DECLARED_TOLERANCE * big_b.abs().max(1.0)
                    } else {
                        d.capacity_ratio == big_b
                    };
                    if !same {
                        return Err(Error::validation(
                            "declared.capacity_ratio",
                            format!("declared B = {} but A, b give B = {big_b}", d.capacity_ratio),
                        ));
                    }
                    if d.column_sparsity != p.column_sparsity() {
                        return Err(Error::validation(
                            "declared.column_sparsity",
                            format!(
                                "declared d = {} but A has d = {}",
                                d.column_sparsity,
                                p.column_sparsity()
                            ),
                        ));
                    }
                }
                Ok(Instance::Packing(p))
            }
        }
    }

    fn check_n(&self, actual: usize, what: &str) -> Result<()> {
        if self.n != actual {
            return Err(Error::validation(
                "n",
                format!("n = {} but the {what} has {actual} items", self.n),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(parse_error)
    }
}

/// Converts a JSON error into a positioned parse error.
pub fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn load_instance_file(path: impl AsRef<Path>) -> Result<InstanceFile> {
    InstanceFile::from_json(&std::fs::read_to_string(path)?)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    load_instance_file(path)?.to_instance()
}

pub fn save_instance_file(file: &InstanceFile, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, file.to_json())?;
    Ok(())
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    save_instance_file(&InstanceFile::from_instance(instance), path)
}
