//! CSV output with numbers at 12 significant digits.

use crate::harness::{BoundReport, RateAudit, TrialStats};
use crate::online::RunRecord;

use super::report::ReportFile;

/// Significant digits in CSV output.
pub const CSV_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits, printed in the shortest form that
/// parses back to the rounded value.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{:.*e}", CSV_DIGITS - 1, x).parse().expect("valid float");
    format!("{rounded}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

/// Tables separated by `# name` rows.
struct Sections {
    writer: csv::Writer<Vec<u8>>,
}

impl Sections {
    fn new() -> Self {
        Sections {
            writer: csv::WriterBuilder::new().flexible(true).from_writer(Vec::new()),
        }
    }

    fn section(&mut self, name: &str) {
        self.row([format!("# {name}")]);
    }

    fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory csv write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.writer.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
    }
}

const BOUND_HEADER: [&str; 11] = [
    "kind",
    "k",
    "alpha",
    "capacity_ratio",
    "column_sparsity",
    "known",
    "value",
    "n",
    "n_adjusted",
    "stated",
    "caveat",
];

fn bound_row(b: &BoundReport) -> Vec<String> {
    vec![
        b.kind.name().to_string(),
        opt(b.k),
        opt_num(b.alpha),
        opt_num(b.capacity_ratio),
        opt(b.column_sparsity),
        opt(b.known),
        format_number(b.value),
        opt(b.n),
        opt_num(b.n_adjusted),
        opt_num(b.stated),
        b.caveat.to_string(),
    ]
}

/// Bound table, one row per report.
pub fn bounds_csv(bounds: &[BoundReport]) -> String {
    let mut s = Sections::new();
    s.row(BOUND_HEADER);
    for b in bounds {
        s.row(bound_row(b));
    }
    s.finish()
}

fn write_stats(s: &mut Sections, stats: &TrialStats) {
    s.section("summary");
    s.row(["field", "value"]);
    s.row(["trials".to_string(), stats.trials.to_string()]);
    for (name, v) in [
        ("mean_value", stats.mean_value),
        ("mean_ratio", stats.mean_ratio),
        ("std_err", stats.std_err),
        ("ci95_low", stats.ci95[0]),
        ("ci95_high", stats.ci95[1]),
        ("min_ratio", stats.min_ratio),
        ("max_ratio", stats.max_ratio),
        ("opt_value", stats.opt_value),
    ] {
        s.row([name.to_string(), format_number(v)]);
    }
    s.row([
        "benchmark".to_string(),
        serde_json::to_value(stats.benchmark)
            .unwrap()
            .as_str()
            .unwrap_or("")
            .to_string(),
    ]);
    s.row(["integral_opt".to_string(), opt_num(stats.integral_opt)]);
    s.row([
        "invariant_violations".to_string(),
        stats.invariant_violations.to_string(),
    ]);

    s.section("per_round");
    s.row(["round", "tentative", "feasible", "accepted", "acceptance_rate"]);
    for (t, rate) in stats.per_round.iter().zip(&stats.per_round_acceptance_rate) {
        s.row([
            t.round.to_string(),
            t.tentative.to_string(),
            t.feasible.to_string(),
            t.accepted.to_string(),
            format_number(*rate),
        ]);
    }
}

fn write_audit(s: &mut Sections, audit: &RateAudit) {
    s.row([
        "round",
        "tentative",
        "feasible",
        "rate",
        "std_err",
        "bound",
        "violation",
    ]);
    for r in &audit.rows {
        s.row([
            r.round.to_string(),
            r.tentative.to_string(),
            r.feasible.to_string(),
            format_number(r.rate),
            format_number(r.std_err),
            format_number(r.bound),
            r.violation.to_string(),
        ]);
    }
}

/// Summary, per-round table, bounds and audit of a report.
pub fn report_csv(report: &ReportFile) -> String {
    let mut s = Sections::new();
    s.section("config");
    s.row(["field", "value"]);
    s.row(["code_version", report.code_version.as_str()]);
    s.row(["master_seed".to_string(), report.config.master_seed.to_string()]);
    s.row(["algorithm", report.config.algorithm.name()]);
    s.row(["variant".to_string(), report.config.instance.variant.to_string()]);
    s.row(["n".to_string(), report.config.instance.n.to_string()]);
    write_stats(&mut s, &report.stats);
    s.section("bounds");
    s.row(BOUND_HEADER);
    for b in &report.bounds {
        s.row(bound_row(b));
    }
    if let Some(a) = &report.audit {
        s.section(match a.kind {
            super::report::AuditKind::MatchingCollision => "matching_collision_audit",
            super::report::AuditKind::PackingFeasibility => "packing_feasibility_audit",
        });
        write_audit(&mut s, &a.audit);
    }
    s.finish()
}

/// Per-round trace of a single run.
pub fn run_csv(record: &RunRecord) -> String {
    let mut s = Sections::new();
    s.section("run");
    s.row(["field", "value"]);
    s.row(["variant".to_string(), record.variant.to_string()]);
    s.row(["sample_rounds".to_string(), record.sample_rounds.to_string()]);
    s.row(["value".to_string(), format_number(record.value)]);
    s.row(["seed".to_string(), opt(record.seed)]);
    s.row([
        "selection".to_string(),
        record
            .selection
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" "),
    ]);
    s.section("rounds");
    s.row(["round", "arrival", "selected", "tentative", "feasible", "accepted"]);
    for r in &record.rounds {
        s.row([
            r.round.to_string(),
            r.arrival.to_string(),
            opt(r.selected),
            r.tentative.to_string(),
            opt(r.feasible),
            r.accepted.to_string(),
        ]);
    }
    s.finish()
}
