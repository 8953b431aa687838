//! Modality resolution and workflow simulation.
//!
//! A run is two steps: a resolver turns the model (plus a context or a
//! global mode) into an [`Assignment`] of one [`ModalityDecision`] per task,
//! then [`simulate`] executes that assignment over the DAG and accounts for
//! energy, critical-path response time, reward and mean quality.
//!
//! Skip is only honoured for optional tasks. Any resolver (or a hand-built
//! assignment passed to [`simulate`]) that would skip another task gets
//! clamped to normal execution and the clamp is recorded.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::model::{ApplicationModel, ExecutionProfile, Microservice, Modality};
use crate::rules::{evaluate_table, ContextSnapshot, ModalityDecision, RuleError};

/// Above this many tasks the optimizer switches from exhaustive search to a
/// greedy descent.
pub const EXACT_SEARCH_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PowerSetting {
    #[default]
    Normal,
    LowPower,
    HighPerformance,
}

/// Workflow-level execution modality. `basic` skips optional tasks and
/// combines with any power setting; low power and high performance are two
/// ends of one axis and cannot be combined, which this type makes
/// unrepresentable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WorkflowMode {
    pub basic: bool,
    pub power: PowerSetting,
}

impl WorkflowMode {
    pub const NORMAL: WorkflowMode = WorkflowMode { basic: false, power: PowerSetting::Normal };

    pub fn from_flags(basic: bool, low_power: bool, high_performance: bool) -> Result<Self, EngineError> {
        let power = match (low_power, high_performance) {
            (true, true) => return Err(EngineError::ContradictoryMode),
            (true, false) => PowerSetting::LowPower,
            (false, true) => PowerSetting::HighPerformance,
            (false, false) => PowerSetting::Normal,
        };
        Ok(WorkflowMode { basic, power })
    }

    pub fn is_normal(&self) -> bool {
        *self == WorkflowMode::NORMAL
    }
}

impl fmt::Display for WorkflowMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let power = match self.power {
            PowerSetting::Normal => None,
            PowerSetting::LowPower => Some("low-power"),
            PowerSetting::HighPerformance => Some("high-performance"),
        };
        match (self.basic, power) {
            (false, None) => f.write_str("normal"),
            (true, None) => f.write_str("basic"),
            (false, Some(p)) => f.write_str(p),
            (true, Some(p)) => write!(f, "basic+{p}"),
        }
    }
}

/// One decision per microservice id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    pub decisions: BTreeMap<String, ModalityDecision>,
    /// Tasks whose requested skip was turned into normal execution.
    pub clamped: BTreeSet<String>,
    pub notes: Vec<String>,
}

impl Assignment {
    pub fn get(&self, id: &str) -> Option<ModalityDecision> {
        self.decisions.get(id).copied()
    }

    pub fn set(&mut self, id: impl Into<String>, decision: ModalityDecision) {
        self.decisions.insert(id.into(), decision);
    }

    fn decide(&mut self, task: &Microservice, decision: ModalityDecision, source: &str) {
        if decision == ModalityDecision::Skip && !task.relevance.is_optional() {
            self.clamped.insert(task.id.clone());
            self.notes.push(format!("{}: skip from {source} clamped to normal (task is not optional)", task.id));
            self.decisions.insert(task.id.clone(), ModalityDecision::UseNormal);
        } else {
            self.decisions.insert(task.id.clone(), decision);
        }
    }
}

/// What to do when a task's decision table cannot be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RuleErrorPolicy {
    #[default]
    Fail,
    /// Use the table's default output and record a note.
    UseTableDefault,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnactmentConfig {
    AllIn(WorkflowMode),
    RuleDriven { global_table: Option<String>, on_error: RuleErrorPolicy },
    Optimized(OptimizationObjective),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    ResponseTime,
    Energy,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::ResponseTime => "max_response_time_ms",
            BoundKind::Energy => "max_energy_j",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundViolation {
    pub bound: BoundKind,
    pub limit: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("low-power and high-performance execution cannot be combined")]
    ContradictoryMode,
    #[error("task `{task}`: {source}")]
    Rule { task: String, source: RuleError },
    #[error("global table `{table}`: {source}")]
    GlobalRule { table: String, source: RuleError },
    #[error("rule-driven enactment needs per-task tables or a global table")]
    NoTables,
    #[error("unknown decision table `{0}`")]
    UnknownTable(String),
    #[error("assignment has no decision for task `{0}`")]
    IncompleteAssignment(String),
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error(
        "no assignment satisfies the bounds; tightest: {} = {} exceeded ({} at the best infeasible point)",
        .tightest.bound, .tightest.limit, .tightest.value
    )]
    Infeasible { tightest: BoundViolation, violations: Vec<BoundViolation> },
    #[error("{tasks} tasks exceed the exact search limit of {limit}")]
    TooLargeForExact { tasks: usize, limit: usize },
    #[error("request `{0}` appears twice in the timeline")]
    DuplicateRequest(String),
    #[error("request `{request}`: {source}")]
    Timeline { request: String, source: Box<EngineError> },
}

/// Workflow-level mode applied to every task.
pub fn resolve_all_in(model: &ApplicationModel, mode: WorkflowMode) -> Assignment {
    let mut assignment = Assignment::default();
    for task in model.microservices() {
        let decision = if mode.basic && task.relevance.is_optional() {
            ModalityDecision::Skip
        } else {
            match mode.power {
                PowerSetting::LowPower => ModalityDecision::UseLowPower,
                PowerSetting::HighPerformance => ModalityDecision::UseHighPerformance,
                PowerSetting::Normal => ModalityDecision::UseNormal,
            }
        };
        assignment.set(task.id.clone(), decision);
    }
    assignment
}

/// Evaluates each task's own decision table against `ctx`; tasks without a
/// table run normal. Rule errors fail the resolution.
pub fn resolve_rule_driven(model: &ApplicationModel, ctx: &ContextSnapshot) -> Result<Assignment, EngineError> {
    resolve_rule_driven_with(model, ctx, None, RuleErrorPolicy::Fail)
}

/// Rule-driven resolution with an optional global table and an error policy.
///
/// A global table selects one workflow mode for all tasks: `skip` selects
/// basic execution, the other outputs select the matching power setting.
pub fn resolve_rule_driven_with(
    model: &ApplicationModel,
    ctx: &ContextSnapshot,
    global_table: Option<&str>,
    on_error: RuleErrorPolicy,
) -> Result<Assignment, EngineError> {
    if let Some(table_id) = global_table {
        let table = model
            .decision_tables()
            .get(table_id)
            .ok_or_else(|| EngineError::UnknownTable(table_id.into()))?;
        let (decision, note) = match (evaluate_table(table, ctx), on_error) {
            (Ok(d), _) => (d, None),
            (Err(source), RuleErrorPolicy::Fail) => {
                return Err(EngineError::GlobalRule { table: table_id.into(), source })
            }
            (Err(e), RuleErrorPolicy::UseTableDefault) => {
                (table.default_output, Some(format!("global table `{table_id}`: {e}; using default")))
            }
        };
        let mode = match decision {
            ModalityDecision::Skip => WorkflowMode { basic: true, power: PowerSetting::Normal },
            ModalityDecision::UseNormal => WorkflowMode::NORMAL,
            ModalityDecision::UseLowPower => WorkflowMode { basic: false, power: PowerSetting::LowPower },
            ModalityDecision::UseHighPerformance => {
                WorkflowMode { basic: false, power: PowerSetting::HighPerformance }
            }
        };
        let mut assignment = resolve_all_in(model, mode);
        assignment.notes.extend(note);
        return Ok(assignment);
    }

    let mut assignment = Assignment::default();
    for task in model.microservices() {
        let Some(table_id) = &task.decision_table_ref else {
            assignment.set(task.id.clone(), ModalityDecision::UseNormal);
            continue;
        };
        let table = &model.decision_tables()[table_id];
        match evaluate_table(table, ctx) {
            Ok(decision) => assignment.decide(task, decision, &format!("table `{table_id}`")),
            Err(source) => match on_error {
                RuleErrorPolicy::Fail => return Err(EngineError::Rule { task: task.id.clone(), source }),
                RuleErrorPolicy::UseTableDefault => {
                    assignment.notes.push(format!("{}: {source}; using table default", task.id));
                    assignment.decide(task, table.default_output, &format!("table `{table_id}` default"));
                }
            },
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutcome {
    pub id: String,
    pub decision: ModalityDecision,
    /// `None` when the task was skipped.
    pub profile_used: Option<ExecutionProfile>,
    pub energy_j: f64,
    pub clamped: bool,
    /// A non-normal decision ran on the baseline profile because the
    /// requested variant is not declared.
    pub fallback_used: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub outcomes: Vec<TaskOutcome>,
    pub total_energy_j: f64,
    pub response_time_ms: f64,
    pub total_reward: f64,
    pub mean_quality: f64,
    pub warnings: Vec<String>,
}

impl SimulationReport {
    pub fn outcome(&self, id: &str) -> Option<&TaskOutcome> {
        self.outcomes.iter().find(|o| o.id == id)
    }

    pub fn decisions(&self) -> BTreeMap<&str, ModalityDecision> {
        self.outcomes.iter().map(|o| (o.id.as_str(), o.decision)).collect()
    }
}

/// Profile a decision runs with: the declared variant when present, the
/// baseline otherwise. The flag reports a non-normal request served by the
/// baseline.
fn select_profile(task: &Microservice, modality: Modality) -> (ExecutionProfile, bool) {
    match task.declared_variants.get(&modality) {
        Some(p) => (*p, false),
        None => (task.baseline_profile, modality != Modality::Normal),
    }
}

/// Longest finish time over the DAG, with `durations[i]` the time spent at
/// position `i` (zero for skipped tasks, which still relay precedence).
fn critical_path(model: &ApplicationModel, durations: &[f64], finish: &mut [f64]) -> f64 {
    let mut longest = 0.0_f64;
    for &i in model.topological_positions() {
        let start = model.predecessors(i).iter().map(|&p| finish[p]).fold(0.0_f64, f64::max);
        finish[i] = start + durations[i];
        longest = longest.max(finish[i]);
    }
    longest
}

/// Executes `assignment` over the model. The assignment must cover every
/// task.
pub fn simulate(model: &ApplicationModel, assignment: &Assignment) -> Result<SimulationReport, EngineError> {
    let n = model.len();
    let mut outcomes = Vec::with_capacity(n);
    let mut durations = alloc::vec![0.0; n];
    let mut warnings = assignment.notes.clone();

    for (i, task) in model.microservices().iter().enumerate() {
        let requested = assignment
            .get(&task.id)
            .ok_or_else(|| EngineError::IncompleteAssignment(task.id.clone()))?;
        let mut clamped = assignment.clamped.contains(&task.id);
        let decision = if requested == ModalityDecision::Skip && !task.relevance.is_optional() {
            clamped = true;
            warnings.push(format!("{}: skip requested on a non-optional task; running normal", task.id));
            ModalityDecision::UseNormal
        } else {
            requested
        };
        let outcome = match decision.modality() {
            None => TaskOutcome {
                id: task.id.clone(),
                decision,
                profile_used: None,
                energy_j: 0.0,
                clamped,
                fallback_used: false,
            },
            Some(modality) => {
                let (profile, fallback_used) = select_profile(task, modality);
                durations[i] = profile.duration_ms;
                TaskOutcome {
                    id: task.id.clone(),
                    decision,
                    profile_used: Some(profile),
                    energy_j: profile.energy_joules(),
                    clamped,
                    fallback_used,
                }
            }
        };
        outcomes.push(outcome);
    }

    let mut finish = alloc::vec![0.0; n];
    let response_time_ms = critical_path(model, &durations, &mut finish);
    let total_energy_j = outcomes.iter().fold(0.0, |acc, o| acc + o.energy_j);
    let executed: Vec<&ExecutionProfile> = outcomes.iter().filter_map(|o| o.profile_used.as_ref()).collect();
    let total_reward = executed.iter().fold(0.0, |acc, p| acc + p.reward_units);
    let mean_quality = if executed.is_empty() {
        warnings.push("every task was skipped; mean quality reported as 1.0".into());
        1.0
    } else {
        executed.iter().fold(0.0, |acc, p| acc + p.quality_score) / executed.len() as f64
    };

    Ok(SimulationReport { outcomes, total_energy_j, response_time_ms, total_reward, mean_quality, warnings })
}

/// Weighted cost `we * energy + wt * response_time - wr * reward`, with
/// optional hard bounds on response time and energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationObjective {
    pub weight_energy: f64,
    pub weight_time: f64,
    pub weight_reward: f64,
    pub max_response_time_ms: Option<f64>,
    pub max_energy_j: Option<f64>,
}

impl OptimizationObjective {
    pub fn new(weight_energy: f64, weight_time: f64, weight_reward: f64) -> Result<Self, EngineError> {
        let objective = OptimizationObjective {
            weight_energy,
            weight_time,
            weight_reward,
            max_response_time_ms: None,
            max_energy_j: None,
        };
        objective.check()?;
        Ok(objective)
    }

    pub fn with_max_response_time(mut self, ms: f64) -> Self {
        self.max_response_time_ms = Some(ms);
        self
    }

    pub fn with_max_energy(mut self, joules: f64) -> Self {
        self.max_energy_j = Some(joules);
        self
    }

    pub fn check(&self) -> Result<(), EngineError> {
        let weights = [self.weight_energy, self.weight_time, self.weight_reward];
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(EngineError::InvalidObjective("weights must be finite and nonnegative".into()));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(EngineError::InvalidObjective("at least one weight must be positive".into()));
        }
        for bound in [self.max_response_time_ms, self.max_energy_j].into_iter().flatten() {
            if !(bound.is_finite() && bound >= 0.0) {
                return Err(EngineError::InvalidObjective("bounds must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn cost(&self, energy_j: f64, response_time_ms: f64, reward: f64) -> f64 {
        self.weight_energy * energy_j + self.weight_time * response_time_ms - self.weight_reward * reward
    }

    pub fn report_cost(&self, report: &SimulationReport) -> f64 {
        self.cost(report.total_energy_j, report.response_time_ms, report.total_reward)
    }

    pub fn violations(&self, energy_j: f64, response_time_ms: f64) -> Vec<BoundViolation> {
        let mut out = Vec::new();
        if let Some(limit) = self.max_response_time_ms {
            if response_time_ms > limit {
                out.push(BoundViolation { bound: BoundKind::ResponseTime, limit, value: response_time_ms });
            }
        }
        if let Some(limit) = self.max_energy_j {
            if energy_j > limit {
                out.push(BoundViolation { bound: BoundKind::Energy, limit, value: energy_j });
            }
        }
        out
    }
}

fn relative_excess(v: &BoundViolation) -> f64 {
    let excess = v.value - v.limit;
    if v.limit > 0.0 {
        excess / v.limit
    } else {
        excess
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMethod {
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub assignment: Assignment,
    pub report: SimulationReport,
    pub cost: f64,
    pub method: SearchMethod,
}

fn decision_rank(d: ModalityDecision) -> u8 {
    match d {
        ModalityDecision::UseNormal => 0,
        ModalityDecision::UseLowPower => 1,
        ModalityDecision::UseHighPerformance => 2,
        ModalityDecision::Skip => 3,
    }
}

/// Decisions the optimizer may pick for a task: normal always, a variant
/// only when declared, skip only for optional tasks.
pub fn feasible_decisions(task: &Microservice) -> Vec<ModalityDecision> {
    let mut out = alloc::vec![ModalityDecision::UseNormal];
    if task.declared_variants.contains_key(&Modality::LowPower) {
        out.push(ModalityDecision::UseLowPower);
    }
    if task.declared_variants.contains_key(&Modality::HighPerformance) {
        out.push(ModalityDecision::UseHighPerformance);
    }
    if task.relevance.is_optional() {
        out.push(ModalityDecision::Skip);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Metrics {
    energy: f64,
    response: f64,
    reward: f64,
}

/// Reusable buffers for scoring many candidate assignments. The arithmetic
/// matches [`simulate`] term for term.
struct Evaluator<'m> {
    model: &'m ApplicationModel,
    durations: Vec<f64>,
    finish: Vec<f64>,
}

impl<'m> Evaluator<'m> {
    fn new(model: &'m ApplicationModel) -> Self {
        let n = model.len();
        Evaluator { model, durations: alloc::vec![0.0; n], finish: alloc::vec![0.0; n] }
    }

    fn metrics(&mut self, choice: &[ModalityDecision]) -> Metrics {
        let mut energy = 0.0;
        let mut reward = 0.0;
        for (i, task) in self.model.microservices().iter().enumerate() {
            match choice[i].modality() {
                None => self.durations[i] = 0.0,
                Some(modality) => {
                    let (profile, _) = select_profile(task, modality);
                    self.durations[i] = profile.duration_ms;
                    energy += profile.energy_joules();
                    reward += profile.reward_units;
                }
            }
        }
        let response = critical_path(self.model, &self.durations, &mut self.finish);
        Metrics { energy, response, reward }
    }
}

struct Candidate {
    choice: Vec<ModalityDecision>,
    cost: f64,
    energy: f64,
}

struct Search<'a> {
    objective: &'a OptimizationObjective,
    by_id: Vec<usize>,
    best: Option<Candidate>,
    best_infeasible: Option<(f64, Vec<BoundViolation>)>,
}

impl Search<'_> {
    /// Lower cost, then lower energy, then the task-id ordered decision
    /// sequence preferring normal.
    fn beats(&self, cost: f64, energy: f64, choice: &[ModalityDecision], best: &Candidate) -> bool {
        match cost.partial_cmp(&best.cost).unwrap_or(Ordering::Equal) {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {}
        }
        match energy.partial_cmp(&best.energy).unwrap_or(Ordering::Equal) {
            Ordering::Less => return true,
            Ordering::Greater => return false,
            Ordering::Equal => {}
        }
        let ours = self.by_id.iter().map(|&i| decision_rank(choice[i]));
        let theirs = self.by_id.iter().map(|&i| decision_rank(best.choice[i]));
        ours.lt(theirs)
    }

    fn offer(&mut self, choice: &[ModalityDecision], m: Metrics) {
        let violations = self.objective.violations(m.energy, m.response);
        if violations.is_empty() {
            let cost = self.objective.cost(m.energy, m.response, m.reward);
            let better = match &self.best {
                None => true,
                Some(best) => self.beats(cost, m.energy, choice, best),
            };
            if better {
                self.best = Some(Candidate { choice: choice.to_vec(), cost, energy: m.energy });
            }
        } else if self.best.is_none() {
            let total: f64 = violations.iter().map(relative_excess).sum();
            if self.best_infeasible.as_ref().is_none_or(|(t, _)| total < *t) {
                self.best_infeasible = Some((total, violations));
            }
        }
    }

    fn infeasible(self) -> EngineError {
        let (_, violations) = self.best_infeasible.expect("an infeasible search saw at least one candidate");
        let tightest = *violations
            .iter()
            .max_by(|a, b| relative_excess(a).partial_cmp(&relative_excess(b)).unwrap_or(Ordering::Equal))
            .expect("infeasible points violate at least one bound");
        EngineError::Infeasible { tightest, violations }
    }
}

/// Picks one decision per task minimizing the objective.
///
/// Exhaustive up to [`EXACT_SEARCH_LIMIT`] tasks; larger models use greedy
/// single-task moves from all-normal when `allow_greedy` is set, and fail
/// with [`EngineError::TooLargeForExact`] otherwise.
pub fn optimize_assignment(
    model: &ApplicationModel,
    objective: &OptimizationObjective,
    allow_greedy: bool,
) -> Result<Optimized, EngineError> {
    objective.check()?;
    let tasks = model.microservices();
    let options: Vec<Vec<ModalityDecision>> = tasks.iter().map(feasible_decisions).collect();
    let mut by_id: Vec<usize> = (0..tasks.len()).collect();
    by_id.sort_by(|&a, &b| tasks[a].id.cmp(&tasks[b].id));
    let mut search = Search { objective, by_id, best: None, best_infeasible: None };
    let mut evaluator = Evaluator::new(model);

    let method = if tasks.len() <= EXACT_SEARCH_LIMIT {
        exhaustive(&options, &mut evaluator, &mut search);
        SearchMethod::Exhaustive
    } else if allow_greedy {
        greedy(&options, &mut evaluator, &mut search);
        SearchMethod::Greedy
    } else {
        return Err(EngineError::TooLargeForExact { tasks: tasks.len(), limit: EXACT_SEARCH_LIMIT });
    };

    let Some(best) = search.best.take() else {
        return Err(search.infeasible());
    };
    let mut assignment = Assignment::default();
    for (task, decision) in tasks.iter().zip(&best.choice) {
        assignment.set(task.id.clone(), *decision);
    }
    if method == SearchMethod::Greedy {
        assignment
            .notes
            .push(format!("{} tasks exceed the exact search limit; greedy result, optimality not guaranteed", tasks.len()));
    }
    let report = simulate(model, &assignment)?;
    Ok(Optimized { assignment, report, cost: best.cost, method })
}

fn exhaustive(options: &[Vec<ModalityDecision>], evaluator: &mut Evaluator<'_>, search: &mut Search<'_>) {
    let n = options.len();
    let mut digits = alloc::vec![0usize; n];
    let mut choice: Vec<ModalityDecision> = options.iter().map(|o| o[0]).collect();
    loop {
        let m = evaluator.metrics(&choice);
        search.offer(&choice, m);
        // Odometer increment over the mixed-radix option counts.
        let mut pos = 0;
        loop {
            if pos == n {
                return;
            }
            digits[pos] += 1;
            if digits[pos] < options[pos].len() {
                choice[pos] = options[pos][digits[pos]];
                break;
            }
            digits[pos] = 0;
            choice[pos] = options[pos][0];
            pos += 1;
        }
    }
}

fn greedy(options: &[Vec<ModalityDecision>], evaluator: &mut Evaluator<'_>, search: &mut Search<'_>) {
    let objective = search.objective;
    // Feasible points are ranked by cost; infeasible ones by total excess,
    // always behind any feasible point.
    let score = |m: Metrics| -> (bool, f64) {
        let v = objective.violations(m.energy, m.response);
        if v.is_empty() {
            (true, objective.cost(m.energy, m.response, m.reward))
        } else {
            (false, v.iter().map(relative_excess).sum())
        }
    };
    let improves = |new: (bool, f64), old: (bool, f64)| match (new.0, old.0) {
        (true, false) => true,
        (false, true) => false,
        _ => new.1 < old.1,
    };

    let mut current: Vec<ModalityDecision> = options.iter().map(|o| o[0]).collect();
    let m = evaluator.metrics(&current);
    search.offer(&current, m);
    let mut current_score = score(m);
    loop {
        let mut best_move: Option<(usize, ModalityDecision, (bool, f64))> = None;
        for (i, opts) in options.iter().enumerate() {
            let keep = current[i];
            for &d in opts.iter().filter(|&&d| d != keep) {
                current[i] = d;
                let m = evaluator.metrics(&current);
                search.offer(&current, m);
                let s = score(m);
                let reference = best_move.map_or(current_score, |(_, _, s)| s);
                if improves(s, reference) {
                    best_move = Some((i, d, s));
                }
            }
            current[i] = keep;
        }
        match best_move {
            Some((i, d, s)) => {
                current[i] = d;
                current_score = s;
            }
            None => return,
        }
    }
}

/// Ordered `(request id, context)` pairs with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContextTimeline {
    entries: Vec<(String, ContextSnapshot)>,
}

impl ContextTimeline {
    pub fn new(entries: Vec<(String, ContextSnapshot)>) -> Result<Self, EngineError> {
        let mut seen = BTreeSet::new();
        for (id, _) in &entries {
            if !seen.insert(id.as_str()) {
                return Err(EngineError::DuplicateRequest(id.clone()));
            }
        }
        Ok(ContextTimeline { entries })
    }

    pub fn entries(&self) -> &[(String, ContextSnapshot)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimelineRun {
    pub reports: Vec<(String, SimulationReport)>,
    /// Entries that failed, in timeline order. Always empty in strict runs.
    pub errors: Vec<(String, EngineError)>,
    pub total_energy_j: f64,
    pub total_reward: f64,
    /// Mean over the successful reports; zero when there are none.
    pub mean_response_time_ms: f64,
}

/// Resolves one request under `config` and simulates it.
pub fn enact(
    model: &ApplicationModel,
    config: &EnactmentConfig,
    ctx: &ContextSnapshot,
) -> Result<SimulationReport, EngineError> {
    let assignment = match config {
        EnactmentConfig::AllIn(mode) => resolve_all_in(model, *mode),
        EnactmentConfig::RuleDriven { global_table, on_error } => {
            resolve_rule_driven_with(model, ctx, global_table.as_deref(), *on_error)?
        }
        EnactmentConfig::Optimized(objective) => return Ok(optimize_assignment(model, objective, true)?.report),
    };
    simulate(model, &assignment)
}

fn check_config(model: &ApplicationModel, config: &EnactmentConfig) -> Result<(), EngineError> {
    match config {
        EnactmentConfig::AllIn(_) => Ok(()),
        EnactmentConfig::RuleDriven { global_table: Some(t), .. } => {
            if model.decision_tables().contains_key(t) {
                Ok(())
            } else {
                Err(EngineError::UnknownTable(t.clone()))
            }
        }
        EnactmentConfig::RuleDriven { global_table: None, .. } => {
            if model.microservices().iter().any(|m| m.decision_table_ref.is_some()) {
                Ok(())
            } else {
                Err(EngineError::NoTables)
            }
        }
        EnactmentConfig::Optimized(objective) => objective.check(),
    }
}

/// Runs every timeline entry in order. Without `strict`, failing entries are
/// collected and the run continues; with it, the first failure aborts.
pub fn run_timeline(
    model: &ApplicationModel,
    config: &EnactmentConfig,
    timeline: &ContextTimeline,
    strict: bool,
) -> Result<TimelineRun, EngineError> {
    check_config(model, config)?;
    let mut run = TimelineRun::default();
    let mut response_sum = 0.0;
    for (request, ctx) in timeline.entries() {
        match enact(model, config, ctx) {
            Ok(report) => {
                run.total_energy_j += report.total_energy_j;
                run.total_reward += report.total_reward;
                response_sum += report.response_time_ms;
                run.reports.push((request.clone(), report));
            }
            Err(e) if strict => {
                return Err(EngineError::Timeline { request: request.clone(), source: Box::new(e) })
            }
            Err(e) => run.errors.push((request.clone(), e)),
        }
    }
    if !run.reports.is_empty() {
        run.mean_response_time_ms = response_sum / run.reports.len() as f64;
    }
    Ok(run)
}
