//! The `sadp` command line.
//!
//! Exit codes: 0 success, 1 validation or semantic errors, 2 parse errors,
//! 3 runtime errors (rules, optimizer), 4 usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sadp_core::{
    optimize_assignment, resolve_all_in, resolve_rule_driven_with, run_timeline, scorecard, simulate, validate,
    ApplicationModel, AttributeCatalog, EnactmentConfig, EngineError, OptimizationObjective, RuleErrorPolicy,
    SearchMethod, Step2Mode, ValidationIssue, WorkflowMode, EXACT_SEARCH_LIMIT,
};
use serde::Serialize;

use crate::bpmn::import_bpmn_subset_with;
use crate::error::{ParseError, ParseErrorCode};
use crate::report::{
    issues_table, report_table, scorecard_table, timeline_table, ImportJson, OptimizationJson, ReportJson,
    ScorecardJson, SimulationJson, TimelineJson, ValidationJson,
};
use crate::timeline::{parse_context_args, parse_timeline_json};
use crate::workflow::{
    attach_tables, parse_catalog_json, parse_tables_json, parse_workflow_json_with, serialize_workflow, ParseOptions,
    WorkflowDocument,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sadp", version, about = "Sustainability-aware design scoring and enactment for microservice workflows")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Suppress warnings, notes and summaries.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    /// Ignore unknown fields in workflow documents instead of rejecting them.
    #[arg(long, global = true)]
    pub lenient: bool,
    /// Attribute catalog file (list of {key, category}); replaces the document's catalog.
    #[arg(long, global = true, value_name = "FILE")]
    pub catalog: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a workflow and list validation issues.
    Validate(Input),
    /// Print the three design-step scores.
    Score {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Step2Arg::Implicit)]
        step2_mode: Step2Arg,
    },
    /// Convert a BPMN subset file into canonical workflow JSON.
    Import {
        bpmn: PathBuf,
        /// Decision tables referenced by businessRuleTask elements.
        #[arg(long, value_name = "FILE")]
        tables: Option<PathBuf>,
        /// Where to write the JSON (stdout when absent).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Resolve modalities and simulate one run or a timeline.
    Simulate(SimulateArgs),
    /// Search for the assignment minimizing the weighted objective.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct Input {
    /// Workflow file: canonical JSON, or BPMN subset when the extension is .bpmn or .xml.
    pub path: PathBuf,
    /// Decision-table sidecar; overrides embedded tables with the same id.
    #[arg(long, value_name = "FILE")]
    pub tables: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Step2Arg {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Normal,
    Basic,
    LowPower,
    HighPerformance,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: Input,
    /// Workflow mode; repeat to combine (basic with one power setting).
    #[arg(long = "mode", value_enum)]
    pub modes: Vec<ModeArg>,
    /// Resolve each task through its decision table.
    #[arg(long)]
    pub rules: bool,
    /// With --rules: evaluate this table once and apply its output to every task.
    #[arg(long, value_name = "ID", requires = "rules")]
    pub global_table: Option<String>,
    /// Timeline file: [{request, context: {var: {value, unit?}}}].
    #[arg(long, value_name = "FILE")]
    pub timeline: Option<PathBuf>,
    /// Inline context variable, e.g. power=6kW; repeatable.
    #[arg(long = "context", value_name = "KEY=VALUE")]
    pub context: Vec<String>,
    /// Fail on the first rule error instead of using the table default.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub input: Input,
    /// Weight per joule.
    #[arg(long = "we", default_value_t = 0.0, allow_negative_numbers = true)]
    pub weight_energy: f64,
    /// Weight per millisecond of response time.
    #[arg(long = "wt", default_value_t = 0.0, allow_negative_numbers = true)]
    pub weight_time: f64,
    /// Weight per reward unit (subtracted).
    #[arg(long = "wr", default_value_t = 0.0, allow_negative_numbers = true)]
    pub weight_reward: f64,
    /// Upper bound on response time.
    #[arg(long = "max-rt", value_name = "MS", allow_negative_numbers = true)]
    pub max_response_time_ms: Option<f64>,
    /// Upper bound on total energy.
    #[arg(long = "max-energy", value_name = "J", allow_negative_numbers = true)]
    pub max_energy_j: Option<f64>,
    /// Refuse models too large for exhaustive search instead of falling back to greedy.
    #[arg(long)]
    pub exact_only: bool,
}

/// A failed command: exit code plus the message for stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, message)
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        let code = if e.code == ParseErrorCode::SemanticError { EXIT_INVALID } else { EXIT_PARSE };
        Failure::new(code, e.to_string())
    }
}

struct Context<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Context<'_> {
    fn emit_json<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).expect("report types always serialize");
        self.print(&format!("{text}\n"))
    }

    fn print(&mut self, text: &str) -> Result<(), Failure> {
        self.out.write_all(text.as_bytes()).map_err(|e| Failure::new(EXIT_RUNTIME, format!("writing output: {e}")))
    }

    fn note(&mut self, text: &str) {
        if !self.cli.quiet {
            let _ = writeln!(self.err, "{text}");
        }
    }

    fn warn_issues(&mut self, issues: &[ValidationIssue]) {
        for i in issues {
            self.note(&format!("warning[{}] {}: {}", i.code.token(), i.subject, i.message));
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut ctx = Context { cli: &cli, out, err };
    let result = match &cli.command {
        Command::Validate(input) => cmd_validate(&mut ctx, input),
        Command::Score { input, step2_mode } => cmd_score(&mut ctx, input, *step2_mode),
        Command::Import { bpmn, tables, out } => cmd_import(&mut ctx, bpmn, tables.as_deref(), out.as_deref()),
        Command::Simulate(args) => cmd_simulate(&mut ctx, args),
        Command::Optimize(args) => cmd_optimize(&mut ctx, args),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(ctx.err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))
}

fn is_bpmn_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("bpmn") || e.eq_ignore_ascii_case("xml"))
}

fn load(cli: &Cli, input: &Input) -> Result<WorkflowDocument, Failure> {
    load_path(cli, &input.path, input.tables.as_deref(), is_bpmn_path(&input.path))
}

fn load_path(cli: &Cli, path: &Path, tables: Option<&Path>, bpmn: bool) -> Result<WorkflowDocument, Failure> {
    let options = ParseOptions { lenient: cli.lenient };
    let catalog = cli.catalog.as_deref().map(|p| read_file(p).and_then(|t| Ok(parse_catalog_json(&t)?))).transpose()?;
    let sidecar = tables.map(|p| read_file(p).and_then(|t| Ok(parse_tables_json(&t)?))).transpose()?;
    let text = read_file(path)?;
    if bpmn {
        return Ok(import_bpmn_subset_with(
            &text,
            sidecar.unwrap_or_default(),
            catalog.unwrap_or_else(AttributeCatalog::default),
            options,
        )?);
    }
    let mut doc = parse_workflow_json_with(&text, options)?;
    if let Some(catalog) = catalog {
        doc.application = doc.application.with_catalog(catalog);
    }
    if let Some(tables) = sidecar {
        doc.application = attach_tables(&doc.application, tables)
            .map_err(|e| Failure::new(EXIT_INVALID, format!("attaching tables: {e}")))?;
    }
    Ok(doc)
}

fn all_issues(doc: &WorkflowDocument) -> Vec<ValidationIssue> {
    let mut issues = doc.diagnostics.clone();
    issues.extend(validate(&doc.application));
    issues
}

fn cmd_validate(ctx: &mut Context, input: &Input) -> Result<i32, Failure> {
    let doc = load(ctx.cli, input)?;
    let issues = all_issues(&doc);
    match ctx.cli.format {
        Format::Json => ctx.emit_json(&ValidationJson::new(&issues))?,
        Format::Table => ctx.print(&issues_table(&issues))?,
    }
    Ok(if issues.iter().any(ValidationIssue::is_error) { EXIT_INVALID } else { EXIT_OK })
}

fn cmd_score(ctx: &mut Context, input: &Input, mode: Step2Arg) -> Result<i32, Failure> {
    let doc = load(ctx.cli, input)?;
    let issues = all_issues(&doc);
    if issues.iter().any(ValidationIssue::is_error) {
        let _ = ctx.err.write_all(issues_table(&issues).as_bytes());
        return Err(Failure::new(EXIT_INVALID, "validation errors block scoring"));
    }
    ctx.warn_issues(&issues);
    let mode = match mode {
        Step2Arg::Explicit => Step2Mode::Explicit,
        Step2Arg::Implicit => Step2Mode::Implicit,
    };
    let card = scorecard(&doc.application, mode);
    match ctx.cli.format {
        Format::Json => ctx.emit_json(&ScorecardJson::from(&card))?,
        Format::Table if ctx.cli.quiet => {
            let table = scorecard_table(&card);
            ctx.print(table.lines().next().map(|l| format!("{l}\n")).as_deref().unwrap_or_default())?
        }
        Format::Table => ctx.print(&scorecard_table(&card))?,
    }
    Ok(EXIT_OK)
}

fn cmd_import(ctx: &mut Context, bpmn: &Path, tables: Option<&Path>, out: Option<&Path>) -> Result<i32, Failure> {
    let cli = ctx.cli;
    // Import always reads BPMN, whatever the extension.
    let doc = load_path(cli, bpmn, tables, true)?;
    ctx.warn_issues(&doc.diagnostics);
    let json = serialize_workflow(&doc);
    let model = &doc.application;
    let summary = ImportJson {
        id: model.id().to_string(),
        tasks: model.len(),
        edges: model.edges().len(),
        annotations: model.microservices().iter().map(|m| m.annotations.len()).sum(),
        tables: model.decision_tables().len(),
        out: out.map(|p| p.display().to_string()),
    };
    let text = format!(
        "imported `{}`: {} tasks, {} edges, {} annotations, {} decision tables",
        summary.id, summary.tasks, summary.edges, summary.annotations, summary.tables
    );
    match out {
        Some(path) => {
            std::fs::write(path, &json)
                .map_err(|e| Failure::new(EXIT_RUNTIME, format!("cannot write {}: {e}", path.display())))?;
            match ctx.cli.format {
                Format::Json => ctx.emit_json(&summary)?,
                Format::Table => {
                    if !ctx.cli.quiet {
                        ctx.print(&format!("{text}\n"))?
                    }
                }
            }
        }
        None => {
            ctx.print(&json)?;
            ctx.note(&text);
        }
    }
    Ok(EXIT_OK)
}

fn workflow_mode(modes: &[ModeArg]) -> Result<WorkflowMode, Failure> {
    let has = |m: ModeArg| modes.contains(&m);
    let powers = [ModeArg::Normal, ModeArg::LowPower, ModeArg::HighPerformance].into_iter().filter(|m| has(*m)).count();
    if powers > 1 {
        return Err(Failure::usage(
            "contradictory --mode flags: normal, low-power and high-performance are mutually exclusive",
        ));
    }
    WorkflowMode::from_flags(has(ModeArg::Basic), has(ModeArg::LowPower), has(ModeArg::HighPerformance))
        .map_err(|e| Failure::usage(e.to_string()))
}

fn runtime(e: EngineError) -> Failure {
    Failure::new(EXIT_RUNTIME, e.to_string())
}

fn cmd_simulate(ctx: &mut Context, args: &SimulateArgs) -> Result<i32, Failure> {
    match (args.modes.is_empty(), args.rules) {
        (false, true) => return Err(Failure::usage("--mode and --rules are mutually exclusive")),
        (true, false) => return Err(Failure::usage("simulate needs --mode or --rules")),
        _ => {}
    }
    if args.timeline.is_some() && !args.context.is_empty() {
        return Err(Failure::usage("--timeline and --context are mutually exclusive"));
    }
    if args.rules && args.timeline.is_none() && args.context.is_empty() {
        return Err(Failure::usage("--rules needs --timeline or --context"));
    }
    if !args.rules && !args.context.is_empty() {
        return Err(Failure::usage("--context only applies with --rules"));
    }
    let mode = if args.rules { None } else { Some(workflow_mode(&args.modes)?) };
    let inline = if args.context.is_empty() { None } else { Some(parse_context_args(&args.context).map_err(Failure::usage)?) };

    let doc = load(ctx.cli, &args.input)?;
    ctx.warn_issues(&doc.diagnostics);
    let model = &doc.application;
    let policy = if args.strict { RuleErrorPolicy::Fail } else { RuleErrorPolicy::UseTableDefault };
    let strategy = mode.map_or_else(|| "rules".to_string(), |m| m.to_string());

    if let Some(path) = &args.timeline {
        let timeline = parse_timeline_json(&read_file(path)?)?;
        let config = match mode {
            Some(m) => EnactmentConfig::AllIn(m),
            None => EnactmentConfig::RuleDriven { global_table: args.global_table.clone(), on_error: policy },
        };
        let run = run_timeline(model, &config, &timeline, args.strict).map_err(runtime)?;
        match ctx.cli.format {
            Format::Json => ctx.emit_json(&TimelineJson::new(&strategy, &run))?,
            Format::Table => ctx.print(&timeline_table(&run))?,
        }
        return Ok(EXIT_OK);
    }

    let assignment = match (mode, &inline) {
        (Some(m), _) => resolve_all_in(model, m),
        (None, Some(snapshot)) => {
            check_rules_available(model, args.global_table.as_deref())?;
            resolve_rule_driven_with(model, snapshot, args.global_table.as_deref(), policy).map_err(runtime)?
        }
        (None, None) => unreachable!("checked above"),
    };
    let report = simulate(model, &assignment).map_err(runtime)?;
    match ctx.cli.format {
        Format::Json => ctx.emit_json(&SimulationJson {
            strategy,
            notes: assignment.notes.clone(),
            report: ReportJson::from(&report),
        })?,
        Format::Table => ctx.print(&report_table(&report))?,
    }
    Ok(EXIT_OK)
}

fn check_rules_available(model: &ApplicationModel, global: Option<&str>) -> Result<(), Failure> {
    match global {
        Some(t) if !model.decision_tables().contains_key(t) => Err(runtime(EngineError::UnknownTable(t.to_string()))),
        None if model.microservices().iter().all(|m| m.decision_table_ref.is_none()) => Err(runtime(EngineError::NoTables)),
        _ => Ok(()),
    }
}

fn cmd_optimize(ctx: &mut Context, args: &OptimizeArgs) -> Result<i32, Failure> {
    let mut objective = OptimizationObjective::new(args.weight_energy, args.weight_time, args.weight_reward)
        .map_err(|e| Failure::usage(e.to_string()))?;
    if let Some(ms) = args.max_response_time_ms {
        objective = objective.with_max_response_time(ms);
    }
    if let Some(j) = args.max_energy_j {
        objective = objective.with_max_energy(j);
    }
    objective.check().map_err(|e| Failure::usage(e.to_string()))?;

    let doc = load(ctx.cli, &args.input)?;
    ctx.warn_issues(&doc.diagnostics);
    let result = optimize_assignment(&doc.application, &objective, !args.exact_only).map_err(runtime)?;
    if result.method == SearchMethod::Greedy {
        ctx.note(&format!(
            "note: {} tasks exceed the exhaustive search limit of {EXACT_SEARCH_LIMIT}; greedy result may not be optimal",
            doc.application.len()
        ));
    }
    match ctx.cli.format {
        Format::Json => ctx.emit_json(&OptimizationJson::new(&objective, &result))?,
        Format::Table => {
            let method = crate::report::method_token(result.method);
            ctx.print(&format!("objective {} ({method} search)\n", result.cost))?;
            ctx.print(&report_table(&result.report))?;
        }
    }
    Ok(EXIT_OK)
}
