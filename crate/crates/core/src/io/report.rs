//! Experiment reports: configuration echo, statistics, bounds and audits.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::instance_file::{parse_error, InstanceFile};
use crate::error::Result;
use crate::harness::{
    check_matching_collision_rate, check_packing_feasible_rate, estimate_ratio, AlgorithmConfig, BoundReport,
    RateAudit, TrialMode, TrialStats,
};
use crate::instance::Instance;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Everything needed to rerun an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceFile,
    pub algorithm: AlgorithmConfig,
    pub mode: TrialMode,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditKind {
    MatchingCollision,
    PackingFeasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaAudit {
    pub kind: AuditKind,
    #[serde(flatten)]
    pub audit: RateAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub stats: TrialStats,
    pub bounds: Vec<BoundReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<LemmaAudit>,
}

impl ReportFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(parse_error)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// The lemma audit that applies to the instance variant, if any.
pub fn lemma_audit(instance: &Instance, stats: &TrialStats) -> Option<LemmaAudit> {
    match instance {
        Instance::Cardinality(_) => None,
        Instance::Matching(m) => Some(LemmaAudit {
            kind: AuditKind::MatchingCollision,
            audit: check_matching_collision_rate(stats, m.n()),
        }),
        Instance::Packing(p) => {
            let psi = p.psi();
            psi.is_finite().then(|| LemmaAudit {
                kind: AuditKind::PackingFeasibility,
                audit: check_packing_feasible_rate(stats, p.n(), psi),
            })
        }
    }
}

/// Runs the experiment described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ReportFile> {
    let instance = config.instance.to_instance()?;
    let stats = estimate_ratio(&instance, &config.algorithm, config.mode, config.master_seed)?;
    let bounds = config.algorithm.bounds(&instance)?;
    let audit = lemma_audit(&instance, &stats);
    Ok(ReportFile {
        schema_version: REPORT_SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        stats,
        bounds,
        audit,
    })
}

/// Outcome of re-executing a report's configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub identical: bool,
    /// Top-level report fields whose JSON differs.
    pub differences: Vec<String>,
    pub replayed: ReportFile,
}

pub fn replay(report: &ReportFile) -> Result<ReplayOutcome> {
    let replayed = run_experiment(&report.config)?;
    let original = serde_json::to_value(report).expect("reports serialize");
    let fresh = serde_json::to_value(&replayed).expect("reports serialize");
    let mut differences = Vec::new();
    if let (Some(a), Some(b)) = (original.as_object(), fresh.as_object()) {
        for (key, value) in a {
            if b.get(key) != Some(value) {
                differences.push(key.clone());
            }
        }
        for key in b.keys() {
            if !a.contains_key(key) {
                differences.push(key.clone());
            }
        }
    }
    Ok(ReplayOutcome {
        identical: replayed.stats == report.stats && differences.is_empty(),
        differences,
        replayed,
    })
}
