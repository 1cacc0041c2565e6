//! The `fairdiv` command line.
//!
//! Exit codes: 0 on success, 1 when `--assert` is set and the output violates
//! a fairness property, 2 on bad input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairdiv::audit::audit;
use fairdiv::draft::{make_schedule, run_draft, ScheduleKind};
use fairdiv::io::corpus::{Corpus, Entry, Origin};
use fairdiv::io::format::{
    parse_allocation, parse_instance, parse_rational, parse_submodular_spec, render_certification,
    render_draft, render_oracle_verdict, render_report, render_ttc_sd, render_welfare, serialize_instance,
};
use fairdiv::io::generate::{generate_instance, Shape, UtilityKind};
use fairdiv::oracle::{certify_proposition, oracle_check, CertificationPlan, Property, Proposition, Sampler};
use fairdiv::ttc::run_ttc_sd;
use fairdiv::welfare::{
    maximize_nash_equal, maximize_nash_periodic, maximize_submodular, maximize_utilitarian, SearchOptions,
    SubmodularWelfareSpec, DEFAULT_CAP,
};
use fairdiv::{AgentId, Allocation, Instance};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "fairdiv", version, about = "Fair division of indivisible goods")]
struct Cli {
    /// Exit with status 1 when the output violates a fairness property.
    #[arg(long = "assert", global = true)]
    assert: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a mechanism and print the allocation with its trace.
    Run(RunArgs),
    /// Audit an allocation for EF1, swapEF and swapBE.
    Audit(AuditArgs),
    /// Find every welfare-maximizing allocation.
    Maximize(MaximizeArgs),
    /// Brute-force checks and proposition certification.
    Oracle(OracleArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// The built-in example corpus.
    Examples {
        #[command(subcommand)]
        command: ExamplesCommand,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mechanism {
    Draft,
    TtcSd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Schedule {
    Sd,
    Alternating,
    Fifo,
    Random,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Instance file, or `examples/<name>` for a corpus entry.
    instance: String,
    #[arg(long, value_enum)]
    mechanism: Mechanism,
    #[arg(long, value_enum, default_value = "sd")]
    schedule: Schedule,
    /// Comma-separated agent labels or 1-based indices; identity by default.
    #[arg(long)]
    order: Option<String>,
    /// Seed for the random schedule.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    instance: String,
    /// Allocation file, or the name of an allocation of the corpus entry.
    #[arg(long)]
    alloc: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Nash,
    Utilitarian,
    Submodular,
}

#[derive(Args, Debug)]
struct MaximizeArgs {
    instance: String,
    #[arg(long, value_enum)]
    objective: ObjectiveArg,
    /// Submodular welfare parameters; defaults to A = 10 and 1 elsewhere.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Refuse searches over more candidates than this.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u128,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
struct OracleArgs {
    #[command(subcommand)]
    command: Option<OracleCommand>,
    instance: Option<String>,
    alloc: Option<String>,
    /// ef1, swapef or swapbe.
    #[arg(long)]
    property: Option<String>,
    /// Ordered pair `i,j`: does `i` envy `j` beyond the property's bound?
    #[arg(long)]
    pair: Option<String>,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Audit a mechanism or optimizer on random instances.
    Certify {
        /// P1, L1a, L1b, P2, P3 or P4.
        #[arg(long)]
        prop: String,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenKind {
    UniformInt,
    ZeroOne,
    IdenticalPrefs,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "uniform-int")]
    kind: GenKind,
    #[arg(long)]
    agents: usize,
    /// Objects per agent of a pooled instance.
    #[arg(long, conflicts_with = "periods", required_unless_present = "periods")]
    per_agent: Option<usize>,
    /// Period count of a periodic instance.
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long, default_value_t = 0)]
    lo: i64,
    #[arg(long, default_value_t = 20)]
    hi: i64,
    /// Probability of a 1 for zero-one utilities, as `p/q`.
    #[arg(long, default_value = "1/2")]
    p: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum ExamplesCommand {
    /// Every entry with its expected verdicts.
    List,
    /// Print an entry's instance, or one of its allocations.
    Show {
        name: String,
        #[arg(long)]
        alloc: Option<String>,
    },
    /// Write the corpus files to a directory usable as FAIRDIV_CORPUS.
    Export { dir: PathBuf },
    /// Recompute every expected verdict; all entries by default.
    Check { name: Option<String> },
}

/// Input problems; reported on stderr with exit status 2.
#[derive(Debug)]
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type CmdResult = Result<bool, InputError>;

fn fail<T>(msg: impl Into<String>) -> Result<T, InputError> {
    Err(InputError(msg.into()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Audit(a) => cmd_audit(a, out),
        Command::Maximize(a) => cmd_maximize(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Examples { command } => cmd_examples(command, out),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) if cli.assert => {
            let _ = writeln!(err, "assertion failed: a fairness property does not hold");
            EXIT_VIOLATION
        }
        Ok(false) => EXIT_OK,
        Err(InputError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

/// A loaded instance, with its corpus entry when it came from one.
struct Loaded {
    instance: Instance,
    entry: Option<Entry>,
}

fn corpus_name(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("examples/")?;
    Some(name.strip_suffix(".toml").unwrap_or(name))
}

fn load_instance(arg: &str) -> Result<Loaded, InputError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{arg}: {e}")))?;
        let instance = parse_instance(&text).map_err(|e| InputError(format!("{arg}: {e}")))?;
        return Ok(Loaded { instance, entry: None });
    }
    let Some(name) = corpus_name(arg) else {
        return fail(format!("{arg}: no such file"));
    };
    let entry = Corpus::load()?.get(name)?.clone();
    Ok(Loaded { instance: entry.instance()?, entry: Some(entry) })
}

fn load_allocation(loaded: &Loaded, arg: &str) -> Result<Allocation, InputError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{arg}: {e}")))?;
        return parse_allocation(&loaded.instance, &text).map_err(|e| InputError(format!("{arg}: {e}")));
    }
    match &loaded.entry {
        Some(entry) => Ok(entry.allocation(&loaded.instance, arg)?),
        None => fail(format!("{arg}: no such file")),
    }
}

/// An agent label, or a 1-based index.
fn parse_agent(instance: &Instance, s: &str) -> Result<AgentId, InputError> {
    let s = s.trim();
    if let Some(a) = instance.find_agent(s) {
        return Ok(a);
    }
    match s.parse::<usize>() {
        Ok(k) if (1..=instance.agent_count()).contains(&k) => Ok(k - 1),
        _ => fail(format!("unknown agent `{s}`")),
    }
}

fn parse_agents(instance: &Instance, s: &str) -> Result<Vec<AgentId>, InputError> {
    s.split(',').map(|a| parse_agent(instance, a)).collect()
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), InputError> {
    out.write_all(text.as_bytes()).map_err(|e| InputError(format!("writing output: {e}")))
}

fn fair(instance: &Instance, alloc: &Allocation) -> Result<bool, InputError> {
    let report = audit(instance, alloc)?;
    Ok(report.ef1 && report.swap_ef && report.swap_be != Some(false))
}

fn cmd_run(args: RunArgs, out: &mut dyn Write) -> CmdResult {
    let loaded = load_instance(&args.instance)?;
    let inst = &loaded.instance;
    let order = match &args.order {
        Some(s) => parse_agents(inst, s)?,
        None => inst.agents().collect(),
    };
    match args.mechanism {
        Mechanism::Draft => {
            let kind = match args.schedule {
                Schedule::Sd => ScheduleKind::SerialDictatorship,
                Schedule::Alternating => ScheduleKind::AlternatingSd,
                Schedule::Fifo => ScheduleKind::Fifo,
                Schedule::Random => match args.seed {
                    Some(seed) => ScheduleKind::Random { seed },
                    None => return fail("the random schedule needs --seed"),
                },
            };
            let schedule = make_schedule(kind, order, inst.bundle_size())?;
            let (alloc, trace) = run_draft(inst, &schedule)?;
            emit(out, &render_draft(inst, &alloc, &trace))?;
            let report = audit(inst, &alloc)?;
            Ok(report.ef1 && report.swap_ef)
        }
        Mechanism::TtcSd => {
            let (alloc, trace) = run_ttc_sd(inst, &order)?;
            emit(out, &render_ttc_sd(inst, &alloc, &trace))?;
            let report = audit(inst, &alloc)?;
            Ok(report.ef1 && report.swap_be == Some(true))
        }
    }
}

fn cmd_audit(args: AuditArgs, out: &mut dyn Write) -> CmdResult {
    let loaded = load_instance(&args.instance)?;
    let alloc = load_allocation(&loaded, &args.alloc)?;
    let report = audit(&loaded.instance, &alloc)?;
    emit(out, &render_report(&loaded.instance, &alloc, &report))?;
    Ok(report.ef1 && report.swap_ef && report.swap_be != Some(false))
}

fn cmd_maximize(args: MaximizeArgs, out: &mut dyn Write) -> CmdResult {
    let loaded = load_instance(&args.instance)?;
    let inst = &loaded.instance;
    let opts = SearchOptions { cap: args.cap, workers: args.workers.max(1) };
    let result = match args.objective {
        ObjectiveArg::Nash if inst.is_periodic() => maximize_nash_periodic(inst, opts)?,
        ObjectiveArg::Nash => maximize_nash_equal(inst, opts)?,
        ObjectiveArg::Utilitarian => maximize_utilitarian(inst, opts)?,
        ObjectiveArg::Submodular => {
            let Some(periods) = inst.periods() else {
                return fail("submodular welfare needs a periodic instance");
            };
            let spec = match &args.spec {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
                    parse_submodular_spec(&text, periods).map_err(|e| InputError(format!("{}: {e}", path.display())))?
                }
                None => SubmodularWelfareSpec::default_for(periods),
            };
            maximize_submodular(inst, &spec, opts)?
        }
    };
    emit(out, &render_welfare(inst, &result))?;
    for alloc in &result.optima {
        if !fair(inst, alloc)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn parse_property(s: &str) -> Result<Property, InputError> {
    match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "ef1" => Ok(Property::Ef1),
        "swapef" => Ok(Property::SwapEf),
        "swapbe" => Ok(Property::SwapBe),
        _ => fail(format!("unknown property `{s}`; expected ef1, swapef or swapbe")),
    }
}

fn cmd_oracle(args: OracleArgs, out: &mut dyn Write) -> CmdResult {
    if let Some(OracleCommand::Certify { prop, samples, seed, workers }) = args.command {
        let Some(proposition) = Proposition::parse(&prop) else {
            return fail(format!("unknown proposition `{prop}`; expected P1, L1a, L1b, P2, P3 or P4"));
        };
        let plan = CertificationPlan::new(proposition, Sampler::default_for(proposition))?;
        let report = certify_proposition(&plan, samples, seed, workers.max(1));
        emit(out, &render_certification(&report))?;
        return Ok(report.failed == 0);
    }
    let (Some(instance), Some(alloc), Some(property), Some(pair)) = (args.instance, args.alloc, args.property, args.pair)
    else {
        return fail("oracle needs <instance> <allocation> --property <p> --pair i,j, or the certify subcommand");
    };
    let loaded = load_instance(&instance)?;
    let alloc = load_allocation(&loaded, &alloc)?;
    let property = parse_property(&property)?;
    let agents = parse_agents(&loaded.instance, &pair)?;
    let [i, j] = agents[..] else {
        return fail(format!("--pair expects two agents, got `{pair}`"));
    };
    if i == j {
        return fail("--pair needs two distinct agents");
    }
    let verdict = oracle_check(&loaded.instance, &alloc, property, (i, j))?;
    emit(out, &render_oracle_verdict(&loaded.instance, &verdict))?;
    Ok(verdict.holds())
}

fn cmd_gen(args: GenArgs, out: &mut dyn Write) -> CmdResult {
    let kind = match args.kind {
        GenKind::UniformInt => UtilityKind::UniformInt { lo: args.lo, hi: args.hi },
        GenKind::IdenticalPrefs => UtilityKind::IdenticalPrefs { lo: args.lo, hi: args.hi },
        GenKind::ZeroOne => match parse_rational(&args.p) {
            Some(p) => UtilityKind::ZeroOne { p },
            None => return fail(format!("--p `{}` is not an exact rational", args.p)),
        },
    };
    let shape = match (args.per_agent, args.periods) {
        (Some(per_agent), _) => Shape::Pooled { agents: args.agents, per_agent },
        (None, Some(periods)) => Shape::Periodic { agents: args.agents, periods },
        (None, None) => return fail("one of --per-agent or --periods is required"),
    };
    emit(out, &serialize_instance(&generate_instance(&kind, shape, args.seed)?))?;
    Ok(true)
}

fn origin_tag(origin: &Origin) -> String {
    match origin {
        Origin::Published => "published".into(),
        Origin::Derived => "derived".into(),
        Origin::Corrected { published } => format!("corrected; published: {published}"),
    }
}

fn cmd_examples(command: ExamplesCommand, out: &mut dyn Write) -> CmdResult {
    let corpus = Corpus::load()?;
    match command {
        ExamplesCommand::List => {
            let mut text = String::new();
            for entry in &corpus.entries {
                let meta = entry.meta;
                text.push_str(&format!("{}: {}\n", meta.name, meta.title));
                if !meta.allocations.is_empty() {
                    let names: Vec<&str> = meta.allocations.iter().map(|(n, _)| *n).collect();
                    text.push_str(&format!("  allocations: {}\n", names.join(", ")));
                }
                for claim in meta.claims {
                    text.push_str(&format!("  - {} [{}]\n", claim.text, origin_tag(&claim.origin)));
                }
            }
            emit(out, &text)?;
            Ok(true)
        }
        ExamplesCommand::Show { name, alloc } => {
            let entry = corpus.get(&name)?;
            match alloc {
                None => emit(out, &entry.instance_text)?,
                Some(a) => match entry.allocation_texts.iter().find(|(n, _)| *n == a) {
                    Some((_, text)) => emit(out, text)?,
                    None => return fail(format!("entry `{name}` has no allocation named `{a}`")),
                },
            }
            Ok(true)
        }
        ExamplesCommand::Export { dir } => {
            std::fs::create_dir_all(&dir).map_err(|e| InputError(format!("{}: {e}", dir.display())))?;
            let write = |file: String, text: &str| {
                let path = dir.join(file);
                std::fs::write(&path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))
            };
            for entry in &corpus.entries {
                write(format!("{}.toml", entry.name()), &entry.instance_text)?;
                for (alloc, text) in &entry.allocation_texts {
                    write(format!("{}.{alloc}.toml", entry.name()), text)?;
                }
            }
            emit(out, &format!("exported {} entries to {}\n", corpus.entries.len(), dir.display()))?;
            Ok(true)
        }
        ExamplesCommand::Check { name } => {
            let entries: Vec<&Entry> = match &name {
                Some(n) => vec![corpus.get(n)?],
                None => corpus.entries.iter().collect(),
            };
            let mut all = true;
            let mut text = String::new();
            for entry in entries {
                let mut evaluator = fairdiv::io::corpus::Evaluator::new(entry, SearchOptions::default())?;
                for outcome in evaluator.evaluate_all() {
                    all &= outcome.passed;
                    let status = if outcome.passed { "ok  " } else { "FAIL" };
                    text.push_str(&format!("{status} {}: {}", entry.name(), outcome.claim.text));
                    if !outcome.passed {
                        text.push_str(&format!(" (observed: {})", outcome.observed));
                    }
                    text.push('\n');
                }
            }
            emit(out, &text)?;
            Ok(all)
        }
    }
}
