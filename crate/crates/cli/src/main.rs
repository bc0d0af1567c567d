//! `subsec`: generate instances, run the online algorithms, estimate
//! competitive ratios and print bound tables.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use subsec::harness::estimate::{trial_inputs, DEFAULT_TRIALS};
use subsec::harness::{
    bound_greedy_k_secretary, bound_k_secretary, bound_matching, bound_packing, estimate_ratio, AlgorithmConfig,
    BoundReport, TrialMode,
};
use subsec::instance::Variant;
use subsec::io::{
    bounds_csv, format_number, gen_instance, lemma_audit, load_instance_file, replay, report_csv, run_csv,
    run_experiment, ExperimentConfig, FamilyKind, GenSpec, LemmaAudit, ReportFile,
};
use subsec::online::ArrivalOrder;
use subsec::oracle::{
    check_monotone, check_submodular, CheckMode, GainMethod, PropertyReport, DEFAULT_CHECK_TRIALS,
    EXHAUSTIVE_CHECK_MAX_N,
};
use subsec::solvers::{CardinalityKind, ContinuousGreedy, MatchingSolver};

const EXIT_INPUT: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "subsec",
    version,
    about = "Random-order online submodular maximization simulator"
)]
struct Cli {
    /// Master seed; every command is deterministic given it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo trials (estimate, check --audit) or sampled triples (check).
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a random instance file.
    Gen(GenArgs),
    /// Single traced run; prints the run record.
    Run(RunArgs),
    /// Monte Carlo competitive ratio with bounds and rate audits.
    Estimate(EstimateArgs),
    /// Bound tables over parameter grids.
    Bounds(BoundsArgs),
    /// Oracle property checks and, with --audit, per-round rate audits.
    Check(CheckArgs),
    /// Re-execute a report's configuration and diff the result.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cardinality,
    Matching,
    Packing,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Cardinality => Variant::Cardinality,
            VariantArg::Matching => Variant::Matching,
            VariantArg::Packing => Variant::Packing,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Coverage,
    Modular,
    ConcaveSqrt,
    ConcaveCap,
}

impl From<FamilyArg> for FamilyKind {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Coverage => FamilyKind::Coverage,
            FamilyArg::Modular => FamilyKind::Modular,
            FamilyArg::ConcaveSqrt => FamilyKind::ConcaveSqrt,
            FamilyArg::ConcaveCap => FamilyKind::ConcaveCap,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    variant: VariantArg,
    /// Items (cardinality, packing) or online vertices (matching).
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "coverage")]
    family: FamilyArg,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Offline vertices; defaults to ceil(n/2).
    #[arg(long)]
    r_size: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    edge_probability: f64,
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// Target capacity ratio B.
    #[arg(long, default_value_t = 2.0)]
    capacity_ratio: f64,
    /// Target column sparsity d.
    #[arg(long, default_value_t = 2)]
    column_sparsity: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    BruteForce,
    Greedy,
    ModularTopK,
}

#[derive(Clone, Copy, ValueEnum)]
enum GradientArg {
    Exact,
    MonteCarlo,
    ClosedForm,
}

#[derive(Args)]
struct AlgorithmArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Offline solver (cardinality and matching).
    #[arg(long, value_enum, default_value = "greedy")]
    solver: SolverArg,
    /// Sampling fraction; defaults to 1/e (cardinality) or 1/2 (matching).
    #[arg(long)]
    p: Option<f64>,
    /// Packing: use the variant with known B and d.
    #[arg(long)]
    known: bool,
    /// Packing: continuous greedy steps.
    #[arg(long, default_value_t = subsec::solvers::continuous_greedy::DEFAULT_STEPS)]
    steps: usize,
    /// Packing: gradient computation; defaults to exact for n <= 20, else Monte Carlo.
    #[arg(long, value_enum)]
    gradient: Option<GradientArg>,
    /// Packing: Monte Carlo samples per gradient.
    #[arg(long, default_value_t = subsec::solvers::continuous_greedy::DEFAULT_MC_SAMPLES)]
    mc_samples: usize,
}

impl AlgorithmArgs {
    fn config(&self, variant: Variant) -> Result<AlgorithmConfig, String> {
        let mut config = match variant {
            Variant::Cardinality => AlgorithmConfig::k_secretary(match self.solver {
                SolverArg::BruteForce => CardinalityKind::BruteForce,
                SolverArg::Greedy => CardinalityKind::Greedy,
                SolverArg::ModularTopK => CardinalityKind::ModularTopK,
            }),
            Variant::Matching => AlgorithmConfig::matching(match self.solver {
                SolverArg::BruteForce => MatchingSolver::BruteForce,
                SolverArg::Greedy => MatchingSolver::Greedy,
                SolverArg::ModularTopK => return Err("modular-top-k applies to cardinality instances only".into()),
            }),
            Variant::Packing => {
                let mut cg = ContinuousGreedy {
                    steps: self.steps,
                    mc_samples: self.mc_samples,
                    method: None,
                };
                cg.method = self.gradient.map(|g| match g {
                    GradientArg::Exact => GainMethod::Exact,
                    GradientArg::MonteCarlo => GainMethod::MonteCarlo {
                        samples: self.mc_samples,
                    },
                    GradientArg::ClosedForm => GainMethod::ClosedForm,
                });
                AlgorithmConfig::packing(cg, self.known)
            }
        };
        if let Some(p) = self.p {
            match &mut config {
                AlgorithmConfig::KSecretary { p: q, .. } | AlgorithmConfig::Matching { p: q, .. } => *q = p,
                AlgorithmConfig::Packing { .. } => return Err("--p does not apply to packing".into()),
            }
        }
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    algorithm: AlgorithmArgs,
    /// Comma-separated arrival order; random from --seed when omitted.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<usize>>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    algorithm: AlgorithmArgs,
    /// Average over all n! arrival orders instead of sampling (n <= 8).
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundVariant {
    KSecretary,
    GreedyKSecretary,
    Matching,
    Packing,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    variant: BoundVariant,
    /// k values: `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "1")]
    k: String,
    /// Offline approximation ratios, comma list.
    #[arg(long, default_value = "1", value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Also report n-adjusted bounds for these n, comma list.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Packing capacity ratios B, comma list.
    #[arg(long, default_value = "2", value_delimiter = ',')]
    capacity_ratio: Vec<f64>,
    /// Packing column sparsities d: `a..b` or a comma list.
    #[arg(long, default_value = "1")]
    column_sparsity: String,
    /// Packing: bounds for the known-parameters variant.
    #[arg(long)]
    known: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Also estimate per-round rates and audit them against the lemma bounds.
    #[arg(long)]
    audit: bool,
    #[command(flatten)]
    algorithm: CheckAlgorithmArgs,
}

#[derive(Args)]
struct CheckAlgorithmArgs {
    /// Offline solver for the audit run.
    #[arg(long, value_enum, default_value = "greedy")]
    solver: SolverArg,
    #[arg(long)]
    known: bool,
    #[arg(long, value_enum)]
    gradient: Option<GradientArg>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    report: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<subsec::Error> for Failure {
    fn from(e: subsec::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure {
            code: EXIT_INPUT,
            message,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

/// Command output plus an optional check failure.
struct Output {
    text: String,
    failed: Option<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, failed: None }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn parse_range(spec: &str, what: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid {what} list {spec:?}; use a..b or a,b,c");
    if let Some((a, b)) = spec.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
    }
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<Output, Failure> {
    let mut spec = GenSpec::new(args.variant.into(), args.n, args.family.into());
    spec.k = args.k;
    if let Some(r) = args.r_size {
        spec.r_size = r;
    }
    spec.edge_probability = args.edge_probability;
    spec.m = args.m;
    spec.capacity_ratio = args.capacity_ratio;
    spec.column_sparsity = args.column_sparsity;
    if cli.format == Format::Csv {
        return Err("instances are JSON only".to_string().into());
    }
    Ok(Output::ok(gen_instance(&spec, cli.seed)?.to_json()))
}

fn cmd_run(cli: &Cli, args: &RunArgs) -> Result<Output, Failure> {
    let file = load_instance_file(&args.algorithm.instance)?;
    let instance = file.to_instance()?;
    let config = args.algorithm.config(instance.variant())?;
    let (random_order, run_seed) = trial_inputs(instance.n(), cli.seed, 0);
    let order = match &args.order {
        Some(o) => ArrivalOrder::new(o.clone())?,
        None => random_order,
    };
    if order.len() != instance.n() {
        return Err(format!(
            "order has {} entries but the instance has n = {}",
            order.len(),
            instance.n()
        )
        .into());
    }
    let record = config.run(&instance, &order, run_seed)?;
    Ok(Output::ok(match cli.format {
        Format::Json => json(&record),
        Format::Csv => run_csv(&record),
    }))
}

fn audit_failure(audit: &Option<LemmaAudit>) -> Option<String> {
    let a = audit.as_ref()?;
    (!a.audit.passed()).then(|| {
        let rounds: Vec<String> = a
            .audit
            .rows
            .iter()
            .filter(|r| r.violation)
            .map(|r| r.round.to_string())
            .collect();
        format!("rate audit violated in rounds {}", rounds.join(", "))
    })
}

fn cmd_estimate(cli: &Cli, args: &EstimateArgs) -> Result<Output, Failure> {
    let file = load_instance_file(&args.algorithm.instance)?;
    let instance = file.to_instance()?;
    let config = ExperimentConfig {
        algorithm: args.algorithm.config(instance.variant())?,
        instance: file,
        mode: if args.exhaustive {
            TrialMode::Exhaustive
        } else {
            TrialMode::Sampled {
                trials: cli.trials.unwrap_or(DEFAULT_TRIALS),
            }
        },
        master_seed: cli.seed,
    };
    let report = run_experiment(&config)?;
    Ok(Output::ok(match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report_csv(&report),
    }))
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs) -> Result<Output, Failure> {
    let ks = parse_range(&args.k, "k")?;
    let ns: Vec<Option<usize>> = if args.n.is_empty() {
        vec![None]
    } else {
        args.n.iter().copied().map(Some).collect()
    };
    let mut rows: Vec<BoundReport> = Vec::new();
    let mut push = |r: BoundReport| {
        for n in &ns {
            rows.push(match n {
                Some(n) => r.clone().with_n(*n),
                None => r.clone(),
            });
        }
    };
    match args.variant {
        BoundVariant::KSecretary => {
            for &alpha in &args.alpha {
                for &k in &ks {
                    push(bound_k_secretary(k, alpha)?);
                }
            }
        }
        BoundVariant::GreedyKSecretary => {
            for &k in &ks {
                push(bound_greedy_k_secretary(k)?);
            }
        }
        BoundVariant::Matching => {
            for &alpha in &args.alpha {
                push(bound_matching(alpha)?);
            }
        }
        BoundVariant::Packing => {
            let ds = parse_range(&args.column_sparsity, "column sparsity")?;
            for &alpha in &args.alpha {
                for &b in &args.capacity_ratio {
                    for &d in &ds {
                        push(bound_packing(alpha, b, d, args.known)?);
                    }
                }
            }
        }
    }
    Ok(Output::ok(match cli.format {
        Format::Json => json(&rows),
        Format::Csv => bounds_csv(&rows),
    }))
}

#[derive(Serialize)]
struct CheckReport {
    instance_variant: Variant,
    oracle_n: usize,
    properties: Vec<PropertyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    audit: Option<LemmaAudit>,
    passed: bool,
}

fn check_csv(report: &CheckReport) -> String {
    let mut out = String::from("# properties\nproperty,passed,trials_checked,witness\n");
    for p in &report.properties {
        let witness = p
            .witness
            .as_ref()
            .map(|w| format!("\"S={:?} T={:?} x={}\"", w.s, w.t, w.x))
            .unwrap_or_default();
        let name = serde_json::to_value(p.property).expect("serializable");
        out.push_str(&format!(
            "{},{},{},{}\n",
            name.as_str().unwrap_or_default(),
            p.passed,
            p.trials_checked,
            witness
        ));
    }
    if let Some(a) = &report.audit {
        out.push_str("\n# audit\nround,tentative,feasible,rate,std_err,bound,violation\n");
        for r in &a.audit.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.round,
                r.tentative,
                r.feasible,
                format_number(r.rate),
                format_number(r.std_err),
                format_number(r.bound),
                r.violation
            ));
        }
    }
    out.push_str(&format!("\n# result\npassed,{}\n", report.passed));
    out
}

fn cmd_check(cli: &Cli, args: &CheckArgs) -> Result<Output, Failure> {
    let file = load_instance_file(&args.instance)?;
    let instance = file.to_instance()?;
    let oracle = instance.oracle();
    let mode = if oracle.n() <= EXHAUSTIVE_CHECK_MAX_N {
        CheckMode::Exhaustive
    } else {
        CheckMode::Randomized {
            trials: cli.trials.unwrap_or(DEFAULT_CHECK_TRIALS),
            seed: cli.seed,
        }
    };
    let properties = vec![check_monotone(oracle, mode)?, check_submodular(oracle, mode)?];
    let audit = if args.audit {
        let algo = AlgorithmArgs {
            instance: args.instance.clone(),
            solver: args.algorithm.solver,
            p: None,
            known: args.algorithm.known,
            steps: subsec::solvers::continuous_greedy::DEFAULT_STEPS,
            gradient: args.algorithm.gradient,
            mc_samples: subsec::solvers::continuous_greedy::DEFAULT_MC_SAMPLES,
        };
        let config = algo.config(instance.variant())?;
        let trials = cli.trials.unwrap_or(DEFAULT_TRIALS);
        let stats = estimate_ratio(&instance, &config, TrialMode::Sampled { trials }, cli.seed)?;
        lemma_audit(&instance, &stats)
    } else {
        None
    };
    let mut failed: Vec<String> = properties
        .iter()
        .filter(|p| !p.passed)
        .map(|p| format!("{:?} check failed", p.property))
        .collect();
    failed.extend(audit_failure(&audit));
    let report = CheckReport {
        instance_variant: instance.variant(),
        oracle_n: oracle.n(),
        properties,
        audit,
        passed: failed.is_empty(),
    };
    let text = match cli.format {
        Format::Json => json(&report),
        Format::Csv => check_csv(&report),
    };
    Ok(Output {
        text,
        failed: (!failed.is_empty()).then(|| failed.join("; ")),
    })
}

#[derive(Serialize)]
struct ReplayReport {
    identical: bool,
    differences: Vec<String>,
}

fn cmd_replay(cli: &Cli, args: &ReplayArgs) -> Result<Output, Failure> {
    let report = ReportFile::load(&args.report)?;
    let outcome = replay(&report)?;
    let summary = ReplayReport {
        identical: outcome.identical,
        differences: outcome.differences.clone(),
    };
    let text = match cli.format {
        Format::Json => json(&summary),
        Format::Csv => format!(
            "identical,{}\ndifferences,{}\n",
            summary.identical,
            summary.differences.join(" ")
        ),
    };
    Ok(Output {
        text,
        failed: (!outcome.identical).then(|| format!("replay differs in: {}", outcome.differences.join(", "))),
    })
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Run(a) => cmd_run(cli, a),
        Command::Estimate(a) => cmd_estimate(cli, a),
        Command::Bounds(a) => cmd_bounds(cli, a),
        Command::Check(a) => cmd_check(cli, a),
        Command::Replay(a) => cmd_replay(cli, a),
    }
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let output = match execute(&cli) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    if let Err(e) = emit(&cli, &output.text) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    match output.failed {
        Some(msg) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        None => ExitCode::SUCCESS,
    }
}
