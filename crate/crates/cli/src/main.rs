//! `paxp`: probabilistic abductive explanations for decision trees.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use paxp_core::brute::{BudgetError, EnumerationBudget, LabeledSpace, PrecisionTable};
use paxp_core::report::{explain_instance, Check, ExplainFailure, Mode, Report};
use paxp_core::smt::{self, SolverConfig};
use paxp_core::{
    compute_approx_paxp, compute_axp, order_features, parse_instances, Backend, Counter,
    DecisionTree, ExplanationKind, FeatureSet, Instance, Oracle, OracleError, Threshold,
};

#[derive(Parser)]
#[command(
    name = "paxp",
    version,
    about = "Exact probabilistic abductive explanations for decision trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explain one or more instances.
    Explain(ExplainArgs),
    /// Write the SMT-LIB2 problem for "is there a weak PAXp of size at most k".
    EmitSmt(EmitArgs),
    /// Cross-check counting and explainers against brute-force enumeration.
    Verify(VerifyArgs),
    /// Aggregate ApproxPAXp and MinPAXp statistics per threshold.
    Stats(StatsArgs),
}

#[derive(Args)]
struct Input {
    /// Decision tree in the JSON interchange format.
    #[arg(long)]
    tree: PathBuf,
    /// Comma-separated feature values, optionally followed by the expected class.
    #[arg(long, conflicts_with = "instances")]
    instance: Vec<String>,
    /// File with one instance per line.
    #[arg(long)]
    instances: Option<PathBuf>,
}

#[derive(Args)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Builtin)]
    backend: BackendArg,
    /// SMT solver executable reading SMT-LIB2 from a file argument (default: $PAXP_SMT_SOLVER).
    #[arg(long)]
    solver: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    input: Input,
    /// Precision threshold as a decimal in [0, 1]; repeatable.
    #[arg(long, required = true)]
    delta: Vec<Threshold>,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    mode: ModeArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EmitArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    instance: String,
    #[arg(long)]
    delta: Threshold,
    /// Cardinality bound on the fixed features.
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum)]
    encoding: EncodingArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, required = true)]
    delta: Vec<Threshold>,
    /// Largest feature space the oracle will enumerate.
    #[arg(long, default_value_t = EnumerationBudget::default().max_points)]
    budget: u64,
    /// Test hook: offsets counted favorable models by one.
    #[arg(long, hide = true)]
    corrupt_count: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    instances: PathBuf,
    #[arg(long, required = true)]
    delta: Vec<Threshold>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Axp,
    Approx,
    Min,
    All,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Axp => Mode::Axp,
            ModeArg::Approx => Mode::Approx,
            ModeArg::Min => Mode::Min,
            ModeArg::All => Mode::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Builtin,
    SmtMult,
    SmtAdd,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Mult,
    Add,
}

enum Failure {
    Usage(String),
    Input(String),
    Backend(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
            Failure::Backend(_) => 4,
            Failure::Verification(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Input(m)
            | Failure::Backend(m)
            | Failure::Verification(m) => m,
        }
    }
}

impl From<ExplainFailure> for Failure {
    fn from(e: ExplainFailure) -> Failure {
        match e {
            ExplainFailure::SizeOrder { .. } => Failure::Verification(e.to_string()),
            ExplainFailure::Oracle(o) => o.into(),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Failure {
        if e.is_backend_failure() {
            Failure::Backend(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Explain(args) => explain(args),
        Command::EmitSmt(args) => emit_smt(args),
        Command::Verify(args) => verify(args),
        Command::Stats(args) => stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("paxp: error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_tree(path: &Path) -> Result<DecisionTree> {
    DecisionTree::from_json(&read(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_instances(tree: &DecisionTree, input: &Input) -> Result<Vec<Instance>> {
    if let Some(path) = &input.instances {
        return parse_instances(tree, &read(path)?).map_err(|e| match e {
            paxp_core::InstanceError::Empty => {
                Failure::Usage(format!("{}: no instances", path.display()))
            }
            other => Failure::Input(format!("{}: {other}", path.display())),
        });
    }
    if input.instance.is_empty() {
        return Err(Failure::Usage(
            "one of --instance or --instances is required".into(),
        ));
    }
    input
        .instance
        .iter()
        .map(|row| Instance::parse(tree, row).map_err(|e| Failure::Input(e.to_string())))
        .collect()
}

fn oracle(args: &SolverArgs) -> Oracle {
    let backend = match args.backend {
        BackendArg::Builtin => Backend::Builtin,
        BackendArg::SmtMult => Backend::SmtMult,
        BackendArg::SmtAdd => Backend::SmtAdd,
    };
    let solver = args
        .solver
        .clone()
        .map(SolverConfig::new)
        .or_else(SolverConfig::from_env);
    Oracle::new(backend, solver)
}

fn write_output(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(format!("stdout: {e}")))
        }
    }
}

fn write_report(output: &Output, report: &Report) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    write_output(output, &text)
}

/// Explains every instance at every δ, in input order.
fn run_explainers(
    tree: &DecisionTree,
    instances: &[Instance],
    deltas: &[Threshold],
    kinds: &[ExplanationKind],
    oracle: &Oracle,
) -> Result<Report> {
    let mut report = Report::default();
    for (n, delta) in deltas.iter().enumerate() {
        // AXps do not depend on δ.
        let kinds: Vec<ExplanationKind> = kinds
            .iter()
            .copied()
            .filter(|k| n == 0 || *k != ExplanationKind::Axp)
            .collect();
        let per_instance: Vec<_> = instances
            .par_iter()
            .map(|v| explain_instance(tree, v, delta, &kinds, oracle))
            .collect();
        for records in per_instance {
            report.records.extend(records?);
        }
    }
    report.aggregate();
    Ok(report)
}

fn explain(args: ExplainArgs) -> Result<()> {
    let tree = load_tree(&args.input.tree)?;
    let instances = load_instances(&tree, &args.input)?;
    let mode: Mode = args.mode.into();
    let mut report = run_explainers(
        &tree,
        &instances,
        &args.delta,
        mode.kinds(),
        &oracle(&args.solver),
    )?;
    report.command = "explain".into();
    write_report(&args.output, &report)
}

fn emit_smt(args: EmitArgs) -> Result<()> {
    let tree = load_tree(&args.tree)?;
    let v = Instance::parse(&tree, &args.instance).map_err(|e| Failure::Input(e.to_string()))?;
    let text = match args.encoding {
        EncodingArg::Mult => smt::emit_mult_encoding(&tree, &v, &args.delta, args.k),
        EncodingArg::Add => smt::emit_add_encoding(&tree, &v, &args.delta, args.k),
    };
    write_output(&args.output, &text)
}

fn stats(args: StatsArgs) -> Result<()> {
    let tree = load_tree(&args.tree)?;
    let input = Input {
        tree: args.tree.clone(),
        instance: Vec::new(),
        instances: Some(args.instances.clone()),
    };
    let instances = load_instances(&tree, &input)?;
    let kinds = [ExplanationKind::ApproxPaxp, ExplanationKind::MinPaxp];
    let mut report = run_explainers(
        &tree,
        &instances,
        &args.delta,
        &kinds,
        &oracle(&args.solver),
    )?;
    report.command = "stats".into();
    write_report(&args.output, &report)
}

fn verify(args: VerifyArgs) -> Result<()> {
    let tree = load_tree(&args.input.tree)?;
    let instances = load_instances(&tree, &args.input)?;
    let budget = EnumerationBudget::new(args.budget);
    let mut report = Report::new("verify");
    let space = match LabeledSpace::new(&tree, budget) {
        Ok(space) if tree.space().len() <= 20 => Some(space),
        Ok(_) | Err(BudgetError::Points { .. }) | Err(BudgetError::Subsets(_)) => None,
    };
    let Some(space) = space else {
        for v in &instances {
            report.checks.push(Check {
                instance: v.labels(&tree),
                check: "all".into(),
                status: "skipped: budget".into(),
                detail: None,
            });
        }
        return write_report(&args.output, &report);
    };
    let oracle = Oracle::builtin();
    let per_instance: Vec<Vec<Check>> = instances
        .par_iter()
        .map(|v| verify_instance(&tree, &space, v, &args.delta, &oracle, args.corrupt_count))
        .collect();
    report.checks = per_instance.into_iter().flatten().collect();
    let failed = report.checks.iter().filter(|c| c.status == "fail").count();
    write_report(&args.output, &report)?;
    if failed > 0 {
        return Err(Failure::Verification(format!("{failed} check(s) failed")));
    }
    Ok(())
}

fn subsets(ground: &[usize]) -> impl Iterator<Item = FeatureSet> + '_ {
    (0usize..1 << ground.len()).map(move |bits| {
        ground
            .iter()
            .enumerate()
            .filter(|(n, _)| bits & (1 << n) != 0)
            .map(|(_, i)| *i)
            .collect()
    })
}

fn verify_instance(
    tree: &DecisionTree,
    space: &LabeledSpace,
    v: &Instance,
    deltas: &[Threshold],
    oracle: &Oracle,
    corrupt: bool,
) -> Vec<Check> {
    let table = PrecisionTable::from_space(tree, space, v);
    let counter = Counter::new(tree, v);
    let ground = v.path(tree).tested();
    let mut checks = Vec::new();
    let mut check = |name: &str, failure: Option<String>| {
        checks.push(Check {
            instance: v.labels(tree),
            check: name.to_string(),
            status: if failure.is_none() { "pass" } else { "fail" }.into(),
            detail: failure,
        });
    };

    let mismatch = subsets(&ground).find_map(|set| {
        let exact = counter.precision(&set);
        let mut favorable = exact.numerator().clone();
        if corrupt {
            favorable += 1u32;
        }
        let brute = table.precision(&set);
        (favorable != *brute.numerator() || exact.denominator() != brute.denominator()).then(|| {
            format!(
                "{set}: counted {favorable}/{}, enumerated {brute}",
                exact.denominator()
            )
        })
    });
    check("precision", mismatch);

    let axp = compute_axp(tree, v);
    let axp_ok = table.precision(&axp.features).is_one()
        && axp
            .features
            .iter()
            .all(|j| !table.precision(&axp.features.without(j)).is_one());
    check(
        "axp",
        (!axp_ok).then(|| format!("{} is not an AXp", axp.features)),
    );

    let path = FeatureSet::new(ground.clone());
    let order = order_features(tree, v, &path);
    for delta in deltas {
        let approx =
            compute_approx_paxp(tree, v, delta, &order).expect("order derived from the path");
        let weak = table.precision(&approx.features).meets(delta);
        let deletion_minimal = approx
            .features
            .iter()
            .all(|j| !table.precision(&approx.features.without(j)).meets(delta));
        check(
            &format!("approx@{delta}"),
            (!(weak && deletion_minimal)).then(|| {
                format!(
                    "{} fails weak={weak} deletion-minimal={deletion_minimal}",
                    approx.features
                )
            }),
        );

        let minimal_by_enumeration = subsets(approx.features.as_slice())
            .filter(|s| s.len() < approx.len())
            .all(|s| !table.precision(&s).meets(delta));
        let is_paxp = oracle.is_paxp(tree, v, &approx.features, delta);
        check(
            &format!("is_paxp@{delta}"),
            match is_paxp {
                Ok(b) if b == minimal_by_enumeration => None,
                Ok(b) => Some(format!(
                    "oracle says {b}, enumeration says {minimal_by_enumeration}"
                )),
                Err(e) => Some(e.to_string()),
            },
        );

        let min = oracle.compute_min_paxp(tree, v, delta);
        let expected = table.min_size(&path, delta);
        check(
            &format!("min@{delta}"),
            match min {
                Ok(e) if e.len() == expected && table.precision(&e.features).meets(delta) => None,
                Ok(e) => Some(format!(
                    "{} of size {}, smallest is {expected}",
                    e.features,
                    e.len()
                )),
                Err(e) => Some(e.to_string()),
            },
        );
    }
    checks
}
