//! File formats, generators and report emission.

pub mod generate;
pub mod instance_file;
pub mod report;
pub mod table;

pub use generate::{gen_family, gen_instance, gen_packing_constraints, FamilyKind, GenSpec};
pub use instance_file::{
    load_instance, load_instance_file, save_instance, save_instance_file, Declared, InstanceFile,
    INSTANCE_SCHEMA_VERSION,
};
pub use report::{
    lemma_audit, replay, run_experiment, AuditKind, ExperimentConfig, LemmaAudit, ReplayOutcome, ReportFile,
};
pub use table::{bounds_csv, format_number, report_csv, run_csv};
