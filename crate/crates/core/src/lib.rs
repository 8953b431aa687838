//! Sustainability-aware design scoring and enactment for microservice workflows.
//!
//! The crate is organised in four layers:
//!
//!  * [`model`]: the annotated workflow graph (microservices, edges, attribute
//!    catalog, execution profiles) and its validation.
//!  * [`scoring`]: the coverage scores of the three design steps (attribute
//!    annotation, relevance classification, modality variants).
//!  * [`rules`]: decision tables mapping a monitored context to a per-task
//!    modality decision.
//!  * [`engine`]: modality resolution (all-in, rule driven, optimized), the
//!    workflow simulator and timeline runs.
//!
//! Everything here is pure and allocation-only; file formats and the command
//! line live in the `sadp` crate.
#![no_std]

extern crate alloc;

pub mod engine;
pub mod model;
pub mod rules;
pub mod scoring;

pub use engine::{
    enact, feasible_decisions, optimize_assignment, resolve_all_in, resolve_rule_driven,
    resolve_rule_driven_with, run_timeline, simulate, Assignment, BoundKind, BoundViolation,
    ContextTimeline, EnactmentConfig, EngineError, OptimizationObjective, Optimized, PowerSetting,
    RuleErrorPolicy, SearchMethod, SimulationReport, TaskOutcome, TimelineRun, WorkflowMode,
    EXACT_SEARCH_LIMIT,
};
pub use model::{
    build_application, topological_order, validate, ApplicationModel, AttributeCatalog,
    AttributeCategory, Edge, ExecutionProfile, IssueCode, Microservice, Modality, ModelError,
    Relevance, Severity, ValidationIssue,
};
pub use rules::{
    evaluate_condition, evaluate_table, validate_table, Comparator, Condition, ContextSnapshot,
    DecisionTable, HitPolicy, InputDecl, ModalityDecision, Rule, RuleError, Value, ValueKind,
};
pub use scoring::{
    scorecard, step1_score, step2_score_explicit, step2_score_implicit, step3_score, Coverage,
    SadpScorecard, Step2Mode,
};
