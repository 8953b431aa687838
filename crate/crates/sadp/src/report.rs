//! Output shapes for the command line: JSON documents (which parse back
//! into the same types) and plain-text tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sadp_core::{
    Optimized, OptimizationObjective, SadpScorecard, SearchMethod, Severity, SimulationReport, Step2Mode,
    TimelineRun, ValidationIssue,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageJson {
    pub annotated_count: usize,
    pub variant_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorecardJson {
    pub step1: f64,
    pub step2: f64,
    pub step2_mode: String,
    pub step3: f64,
    pub coverage: BTreeMap<String, CoverageJson>,
}

impl From<&SadpScorecard> for ScorecardJson {
    fn from(s: &SadpScorecard) -> Self {
        ScorecardJson {
            step1: s.step1,
            step2: s.step2,
            step2_mode: s.step2_mode.token().to_string(),
            step3: s.step3,
            coverage: s
                .per_microservice_coverage
                .iter()
                .map(|(id, c)| {
                    (id.clone(), CoverageJson { annotated_count: c.annotated_count, variant_count: c.variant_count })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueJson {
    pub severity: String,
    pub code: String,
    pub subject: String,
    pub message: String,
}

impl From<&ValidationIssue> for IssueJson {
    fn from(i: &ValidationIssue) -> Self {
        IssueJson {
            severity: match i.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            }
            .into(),
            code: i.code.token().into(),
            subject: i.subject.clone(),
            message: i.message.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationJson {
    pub valid: bool,
    pub errors: usize,
    pub warnings: usize,
    pub issues: Vec<IssueJson>,
}

impl ValidationJson {
    pub fn new(issues: &[ValidationIssue]) -> Self {
        let errors = issues.iter().filter(|i| i.is_error()).count();
        ValidationJson {
            valid: errors == 0,
            errors,
            warnings: issues.len() - errors,
            issues: issues.iter().map(IssueJson::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeJson {
    pub id: String,
    pub decision: String,
    pub energy_j: f64,
    pub duration_ms: f64,
    pub reward_units: f64,
    /// Absent for skipped tasks.
    pub quality_score: Option<f64>,
    pub fallback_used: bool,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub outcomes: Vec<OutcomeJson>,
    pub total_energy_j: f64,
    pub response_time_ms: f64,
    pub total_reward: f64,
    pub mean_quality: f64,
    pub warnings: Vec<String>,
}

impl From<&SimulationReport> for ReportJson {
    fn from(r: &SimulationReport) -> Self {
        ReportJson {
            outcomes: r
                .outcomes
                .iter()
                .map(|o| OutcomeJson {
                    id: o.id.clone(),
                    decision: o.decision.token().into(),
                    energy_j: o.energy_j,
                    duration_ms: o.profile_used.map_or(0.0, |p| p.duration_ms),
                    reward_units: o.profile_used.map_or(0.0, |p| p.reward_units),
                    quality_score: o.profile_used.map(|p| p.quality_score),
                    fallback_used: o.fallback_used,
                    clamped: o.clamped,
                })
                .collect(),
            total_energy_j: r.total_energy_j,
            response_time_ms: r.response_time_ms,
            total_reward: r.total_reward,
            mean_quality: r.mean_quality,
            warnings: r.warnings.clone(),
        }
    }
}

/// Output of a single `simulate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationJson {
    /// `normal`, `basic+low-power`, ... or `rules`.
    pub strategy: String,
    pub notes: Vec<String>,
    pub report: ReportJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineReportJson {
    pub request: String,
    pub report: ReportJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineErrorJson {
    pub request: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineJson {
    pub strategy: String,
    pub reports: Vec<TimelineReportJson>,
    pub errors: Vec<TimelineErrorJson>,
    pub total_energy_j: f64,
    pub total_reward: f64,
    pub mean_response_time_ms: f64,
}

impl TimelineJson {
    pub fn new(strategy: &str, run: &TimelineRun) -> Self {
        TimelineJson {
            strategy: strategy.into(),
            reports: run
                .reports
                .iter()
                .map(|(request, r)| TimelineReportJson { request: request.clone(), report: r.into() })
                .collect(),
            errors: run
                .errors
                .iter()
                .map(|(request, e)| TimelineErrorJson { request: request.clone(), message: e.to_string() })
                .collect(),
            total_energy_j: run.total_energy_j,
            total_reward: run.total_reward,
            mean_response_time_ms: run.mean_response_time_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveJson {
    pub weight_energy: f64,
    pub weight_time: f64,
    pub weight_reward: f64,
    pub max_response_time_ms: Option<f64>,
    pub max_energy_j: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationJson {
    /// `exhaustive` or `greedy`.
    pub method: String,
    pub cost: f64,
    pub objective: ObjectiveJson,
    pub assignment: BTreeMap<String, String>,
    pub report: ReportJson,
}

impl OptimizationJson {
    pub fn new(objective: &OptimizationObjective, result: &Optimized) -> Self {
        OptimizationJson {
            method: method_token(result.method).into(),
            cost: result.cost,
            objective: ObjectiveJson {
                weight_energy: objective.weight_energy,
                weight_time: objective.weight_time,
                weight_reward: objective.weight_reward,
                max_response_time_ms: objective.max_response_time_ms,
                max_energy_j: objective.max_energy_j,
            },
            assignment: result
                .assignment
                .decisions
                .iter()
                .map(|(id, d)| (id.clone(), d.token().to_string()))
                .collect(),
            report: (&result.report).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportJson {
    pub id: String,
    pub tasks: usize,
    pub edges: usize,
    pub annotations: usize,
    pub tables: usize,
    pub out: Option<String>,
}

pub fn method_token(m: SearchMethod) -> &'static str {
    match m {
        SearchMethod::Exhaustive => "exhaustive",
        SearchMethod::Greedy => "greedy",
    }
}

/// Percentage with one decimal, ties rounded to even, trailing `.0`
/// dropped: `0.2` renders as `20%`, `1/3` as `33.3%`.
pub fn percent(fraction: f64) -> String {
    let tenths = (fraction * 1000.0).round_ties_even();
    let text = format!("{:.1}", tenths / 10.0);
    let text = text.strip_suffix(".0").unwrap_or(&text);
    format!("{text}%")
}

pub fn scorecard_table(s: &SadpScorecard) -> String {
    let step2 = match s.step2_mode {
        Step2Mode::Implicit => format!("{}", s.step2),
        Step2Mode::Explicit => percent(s.step2),
    };
    let mut out = format!("Step 1: {} | Step 2: {} | Step 3: {}\n", percent(s.step1), step2, percent(s.step3));
    if !s.per_microservice_coverage.is_empty() {
        let width = id_width(s.per_microservice_coverage.keys());
        let _ = writeln!(out, "\n{:<width$}  {:>9}  {:>8}", "task", "annotated", "variants");
        for (id, c) in &s.per_microservice_coverage {
            let _ = writeln!(out, "{:<width$}  {:>9}  {:>8}", id, c.annotated_count, c.variant_count);
        }
    }
    out
}

pub fn issues_table(issues: &[ValidationIssue]) -> String {
    let mut out = String::new();
    for i in issues {
        let severity = if i.is_error() { "error" } else { "warning" };
        let _ = writeln!(out, "{severity}[{}] {}: {}", i.code.token(), i.subject, i.message);
    }
    let errors = issues.iter().filter(|i| i.is_error()).count();
    let _ = writeln!(out, "{} error(s), {} warning(s)", errors, issues.len() - errors);
    out
}

pub fn report_table(r: &SimulationReport) -> String {
    let width = id_width(r.outcomes.iter().map(|o| &o.id));
    let mut out = format!(
        "{:<width$}  {:<16}  {:>12}  {:>12}  {:>8}  flags\n",
        "task", "decision", "energy_j", "duration_ms", "reward"
    );
    for o in &r.outcomes {
        let mut flags = Vec::new();
        if o.fallback_used {
            flags.push("fallback");
        }
        if o.clamped {
            flags.push("clamped");
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:<16}  {:>12}  {:>12}  {:>8}  {}",
            o.id,
            o.decision.token(),
            o.energy_j,
            o.profile_used.map_or(0.0, |p| p.duration_ms),
            o.profile_used.map_or(0.0, |p| p.reward_units),
            flags.join(",")
        );
    }
    let _ = writeln!(
        out,
        "total energy {} J | response time {} ms | reward {} | mean quality {}",
        r.total_energy_j, r.response_time_ms, r.total_reward, r.mean_quality
    );
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn timeline_table(run: &TimelineRun) -> String {
    let width = id_width(run.reports.iter().map(|(r, _)| r).chain(run.errors.iter().map(|(r, _)| r))).max(7);
    let mut out = format!("{:<width$}  {:>12}  {:>12}  {:>8}\n", "request", "energy_j", "response_ms", "reward");
    for (request, r) in &run.reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12}  {:>12}  {:>8}",
            request, r.total_energy_j, r.response_time_ms, r.total_reward
        );
    }
    for (request, e) in &run.errors {
        let _ = writeln!(out, "{request:<width$}  error: {e}");
    }
    let _ = writeln!(
        out,
        "total energy {} J | total reward {} | mean response time {} ms",
        run.total_energy_j, run.total_reward, run.mean_response_time_ms
    );
    out
}

fn id_width<'a>(ids: impl Iterator<Item = &'a String>) -> usize {
    ids.map(|s| s.chars().count()).max().unwrap_or(0).max(4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_rendering() {
        assert_eq!(percent(1.0), "100%");
        assert_eq!(percent(0.2), "20%");
        assert_eq!(percent(0.4), "40%");
        assert_eq!(percent(0.0), "0%");
        assert_eq!(percent(1.0 / 3.0), "33.3%");
        assert_eq!(percent(2.0 / 3.0), "66.7%");
        // Exact binary halves.
        assert_eq!(percent(0.0625), "6.2%");
        assert_eq!(percent(0.1875), "18.8%");
    }
}
