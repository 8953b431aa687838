//! Annotated workflow graph: microservices, precedence edges, attribute
//! catalog and execution profiles.
//!
//! An [`ApplicationModel`] is built once through [`build_application`], which
//! enforces the structural invariants (unique ids, resolvable edges and table
//! references, acyclicity). Everything that is a design-quality concern rather
//! than a structural one is reported by [`validate`] as a list of
//! [`ValidationIssue`]s.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::rules::{validate_table, DecisionTable, ModalityDecision};

/// Execution modality of a single microservice variant.
///
/// The derived ordering (`Normal < LowPower < HighPerformance`) is only used
/// for stable display and map iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    Normal,
    LowPower,
    HighPerformance,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Normal, Modality::LowPower, Modality::HighPerformance];

    /// Short token used by the file formats (`N`, `LP`, `HP`).
    pub fn token(self) -> &'static str {
        match self {
            Modality::Normal => "N",
            Modality::LowPower => "LP",
            Modality::HighPerformance => "HP",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "N" => Some(Modality::Normal),
            "LP" => Some(Modality::LowPower),
            "HP" => Some(Modality::HighPerformance),
            _ => None,
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Relevance class of a microservice for the business goal.
///
/// `Unannotated` is kept apart from `Mandatory` so that a model can be scored
/// under both the explicit and the implicit classification approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Relevance {
    Mandatory,
    Optional,
    #[default]
    Unannotated,
}

impl Relevance {
    pub fn is_optional(self) -> bool {
        self == Relevance::Optional
    }

    pub fn token(self) -> &'static str {
        match self {
            Relevance::Mandatory => "mandatory",
            Relevance::Optional => "optional",
            Relevance::Unannotated => "unannotated",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "mandatory" => Some(Relevance::Mandatory),
            "optional" => Some(Relevance::Optional),
            "unannotated" => Some(Relevance::Unannotated),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttributeCategory {
    Functional,
    Quality,
    Sustainability,
}

impl AttributeCategory {
    pub fn token(self) -> &'static str {
        match self {
            AttributeCategory::Functional => "functional",
            AttributeCategory::Quality => "quality",
            AttributeCategory::Sustainability => "sustainability",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "functional" => Some(AttributeCategory::Functional),
            "quality" => Some(AttributeCategory::Quality),
            "sustainability" => Some(AttributeCategory::Sustainability),
            _ => None,
        }
    }
}

/// The set of attribute keys a designer may annotate a task with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeCatalog {
    entries: Vec<(String, AttributeCategory)>,
}

impl AttributeCatalog {
    pub fn new<I, K>(entries: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (K, AttributeCategory)>,
        K: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (key, category) in entries {
            let key = key.into();
            if key.is_empty() {
                return Err(ModelError::InvalidCatalog("empty attribute key".into()));
            }
            if !seen.insert(key.clone()) {
                return Err(ModelError::InvalidCatalog(format!("duplicate attribute key `{key}`")));
            }
            out.push((key, category));
        }
        if out.is_empty() {
            return Err(ModelError::InvalidCatalog("catalog must contain at least one key".into()));
        }
        Ok(AttributeCatalog { entries: out })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.iter().any(|(k, _)| k == key)
    }

    pub fn category(&self, key: &str) -> Option<AttributeCategory> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, c)| *c)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, AttributeCategory)> {
        self.entries.iter().map(|(k, c)| (k.as_str(), *c))
    }
}

impl Default for AttributeCatalog {
    /// `resources` (functional), `qos` (quality), `power` and `cost`
    /// (sustainability).
    fn default() -> Self {
        AttributeCatalog {
            entries: alloc::vec![
                ("resources".to_string(), AttributeCategory::Functional),
                ("qos".to_string(), AttributeCategory::Quality),
                ("power".to_string(), AttributeCategory::Sustainability),
                ("cost".to_string(), AttributeCategory::Sustainability),
            ],
        }
    }
}

/// Power draw, duration, reward and perceived quality of one execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecutionProfile {
    pub power_watts: f64,
    pub duration_ms: f64,
    pub reward_units: f64,
    pub quality_score: f64,
}

impl ExecutionProfile {
    pub const DEFAULT_POWER_WATTS: f64 = 1.0;
    pub const DEFAULT_DURATION_MS: f64 = 100.0;

    pub fn new(power_watts: f64, duration_ms: f64) -> Self {
        ExecutionProfile { power_watts, duration_ms, ..Default::default() }
    }

    pub fn with_reward(mut self, reward_units: f64) -> Self {
        self.reward_units = reward_units;
        self
    }

    pub fn with_quality(mut self, quality_score: f64) -> Self {
        self.quality_score = quality_score;
        self
    }

    /// Energy of one execution in joules (W x ms / 1000).
    pub fn energy_joules(&self) -> f64 {
        self.power_watts * self.duration_ms / 1000.0
    }

    fn check(&self) -> Result<(), &'static str> {
        if !(self.power_watts.is_finite() && self.power_watts >= 0.0) {
            return Err("power_watts must be finite and nonnegative");
        }
        if !(self.duration_ms.is_finite() && self.duration_ms >= 0.0) {
            return Err("duration_ms must be finite and nonnegative");
        }
        if !self.reward_units.is_finite() {
            return Err("reward_units must be finite");
        }
        if !(0.0..=1.0).contains(&self.quality_score) {
            return Err("quality_score must lie in [0, 1]");
        }
        Ok(())
    }
}

impl Default for ExecutionProfile {
    fn default() -> Self {
        ExecutionProfile {
            power_watts: Self::DEFAULT_POWER_WATTS,
            duration_ms: Self::DEFAULT_DURATION_MS,
            reward_units: 0.0,
            quality_score: 1.0,
        }
    }
}

/// A task node of the workflow.
///
/// `baseline_profile` is what the simulator falls back to when no declared
/// variant applies; it is not itself a declared variant and does not count
/// towards the variant score.
#[derive(Debug, Clone, PartialEq)]
pub struct Microservice {
    pub id: String,
    pub name: String,
    pub relevance: Relevance,
    pub annotations: BTreeMap<String, String>,
    pub baseline_profile: ExecutionProfile,
    pub declared_variants: BTreeMap<Modality, ExecutionProfile>,
    pub decision_table_ref: Option<String>,
}

impl Microservice {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Microservice {
            name: id.clone(),
            id,
            relevance: Relevance::Unannotated,
            annotations: BTreeMap::new(),
            baseline_profile: ExecutionProfile::default(),
            declared_variants: BTreeMap::new(),
            decision_table_ref: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn relevance(mut self, relevance: Relevance) -> Self {
        self.relevance = relevance;
        self
    }

    pub fn annotate(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.annotations.insert(key.into(), value.into());
        self
    }

    pub fn baseline(mut self, profile: ExecutionProfile) -> Self {
        self.baseline_profile = profile;
        self
    }

    pub fn variant(mut self, modality: Modality, profile: ExecutionProfile) -> Self {
        self.declared_variants.insert(modality, profile);
        self
    }

    pub fn table(mut self, table_id: impl Into<String>) -> Self {
        self.decision_table_ref = Some(table_id.into());
        self
    }

    /// Number of distinct catalog keys annotated on this task.
    pub fn annotated_count(&self, catalog: &AttributeCatalog) -> usize {
        self.annotations.keys().filter(|k| catalog.contains(k)).count()
    }

    pub fn variant_count(&self) -> usize {
        self.declared_variants.len()
    }
}

/// Precedence edge `from_id -> to_id`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from_id: String,
    pub to_id: String,
}

impl Edge {
    pub fn new(from_id: impl Into<String>, to_id: impl Into<String>) -> Self {
        Edge { from_id: from_id.into(), to_id: to_id.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("model must contain at least one microservice")]
    EmptyModel,
    #[error("microservice id must not be empty")]
    EmptyId,
    #[error("duplicate microservice id `{0}`")]
    DuplicateId(String),
    #[error("edge {from} -> {to} references an unknown microservice")]
    DanglingEdge { from: String, to: String },
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("cycle detected among: {}", .0.join(", "))]
    CycleDetected(Vec<String>),
    #[error("microservice `{task}` references unknown decision table `{table}`")]
    UnknownTableRef { task: String, table: String },
    #[error("decision table registered as `{key}` declares id `{id}`")]
    TableIdMismatch { key: String, id: String },
    #[error("invalid execution profile on `{task}`: {reason}")]
    InvalidProfile { task: String, reason: String },
    #[error("invalid attribute catalog: {0}")]
    InvalidCatalog(String),
}

/// A structurally valid workflow graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplicationModel {
    id: String,
    microservices: Vec<Microservice>,
    edges: Vec<Edge>,
    decision_tables: BTreeMap<String, DecisionTable>,
    catalog: AttributeCatalog,
    index: BTreeMap<String, usize>,
    predecessors: Vec<Vec<usize>>,
    order: Vec<usize>,
}

/// Builds a model, failing on the first structural violation.
pub fn build_application(
    id: impl Into<String>,
    microservices: Vec<Microservice>,
    edges: Vec<Edge>,
    tables: BTreeMap<String, DecisionTable>,
    catalog: AttributeCatalog,
) -> Result<ApplicationModel, ModelError> {
    if microservices.is_empty() {
        return Err(ModelError::EmptyModel);
    }
    let mut index = BTreeMap::new();
    for (i, m) in microservices.iter().enumerate() {
        if m.id.is_empty() {
            return Err(ModelError::EmptyId);
        }
        if index.insert(m.id.clone(), i).is_some() {
            return Err(ModelError::DuplicateId(m.id.clone()));
        }
        let profiles = core::iter::once(&m.baseline_profile).chain(m.declared_variants.values());
        for p in profiles {
            p.check().map_err(|reason| ModelError::InvalidProfile {
                task: m.id.clone(),
                reason: reason.into(),
            })?;
        }
    }

    let n = microservices.len();
    let mut predecessors: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    let mut successors: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for e in &edges {
        let (Some(&from), Some(&to)) = (index.get(&e.from_id), index.get(&e.to_id)) else {
            return Err(ModelError::DanglingEdge { from: e.from_id.clone(), to: e.to_id.clone() });
        };
        if from == to {
            return Err(ModelError::SelfLoop(e.from_id.clone()));
        }
        if !successors[from].contains(&to) {
            successors[from].push(to);
            predecessors[to].push(from);
        }
    }

    for (key, table) in &tables {
        if key != &table.id {
            return Err(ModelError::TableIdMismatch { key: key.clone(), id: table.id.clone() });
        }
    }
    for m in &microservices {
        if let Some(t) = &m.decision_table_ref {
            if !tables.contains_key(t) {
                return Err(ModelError::UnknownTableRef { task: m.id.clone(), table: t.clone() });
            }
        }
    }

    // Kahn's algorithm; the lowest input position among ready nodes goes first.
    let mut indegree: Vec<usize> = predecessors.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &s in &successors[i] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.insert(s);
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n)
            .filter(|&i| indegree[i] > 0)
            .map(|i| microservices[i].id.clone())
            .collect();
        return Err(ModelError::CycleDetected(stuck));
    }

    Ok(ApplicationModel {
        id: id.into(),
        microservices,
        edges,
        decision_tables: tables,
        catalog,
        index,
        predecessors,
        order,
    })
}

impl ApplicationModel {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn microservices(&self) -> &[Microservice] {
        &self.microservices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn decision_tables(&self) -> &BTreeMap<String, DecisionTable> {
        &self.decision_tables
    }

    pub fn catalog(&self) -> &AttributeCatalog {
        &self.catalog
    }

    pub fn len(&self) -> usize {
        self.microservices.len()
    }

    /// Always false for a built model; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.microservices.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Microservice> {
        self.index.get(id).map(|&i| &self.microservices[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Predecessor positions of the microservice at `position`.
    pub fn predecessors(&self, position: usize) -> &[usize] {
        &self.predecessors[position]
    }

    /// Positions in topological order.
    pub fn topological_positions(&self) -> &[usize] {
        &self.order
    }

    /// Rebuilds the model with a different catalog, keeping everything else.
    pub fn with_catalog(&self, catalog: AttributeCatalog) -> ApplicationModel {
        ApplicationModel { catalog, ..self.clone() }
    }

    /// Decomposes the model into the inputs of [`build_application`].
    pub fn into_parts(
        self,
    ) -> (String, Vec<Microservice>, Vec<Edge>, BTreeMap<String, DecisionTable>, AttributeCatalog)
    {
        (self.id, self.microservices, self.edges, self.decision_tables, self.catalog)
    }
}

/// Microservice ids in a deterministic topological order: among the tasks
/// whose predecessors are all placed, the one listed first in the model wins.
pub fn topological_order(model: &ApplicationModel) -> Vec<String> {
    model.order.iter().map(|&i| model.microservices[i].id.clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn token(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IssueCode {
    UnknownAttribute,
    EmptyAnnotations,
    VariantOrdering,
    MandatorySkip,
    BaselineDefaulted,
    UnknownField,
    UnknownVariable,
    KindMismatch,
    UnreachableRule,
    OverlappingRules,
    UniquenessUnverifiable,
}

impl IssueCode {
    pub fn token(self) -> &'static str {
        match self {
            IssueCode::UnknownAttribute => "UnknownAttribute",
            IssueCode::EmptyAnnotations => "EmptyAnnotations",
            IssueCode::VariantOrdering => "VariantOrdering",
            IssueCode::MandatorySkip => "MandatorySkip",
            IssueCode::BaselineDefaulted => "BaselineDefaulted",
            IssueCode::UnknownField => "UnknownField",
            IssueCode::UnknownVariable => "UnknownVariable",
            IssueCode::KindMismatch => "KindMismatch",
            IssueCode::UnreachableRule => "UnreachableRule",
            IssueCode::OverlappingRules => "OverlappingRules",
            IssueCode::UniquenessUnverifiable => "UniquenessUnverifiable",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A design-time finding. Errors block simulation, warnings do not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub code: IssueCode,
    pub message: String,
    pub subject: String,
}

impl ValidationIssue {
    pub fn error(code: IssueCode, subject: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationIssue {
            severity: Severity::Error,
            code,
            message: message.into(),
            subject: subject.into(),
        }
    }

    pub fn warning(code: IssueCode, subject: impl Into<String>, message: impl Into<String>) -> Self {
        ValidationIssue {
            severity: Severity::Warning,
            code,
            message: message.into(),
            subject: subject.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} [{}]: {}", self.severity.token(), self.code, self.subject, self.message)
    }
}

/// Reports every design-quality issue of a built model.
pub fn validate(model: &ApplicationModel) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    for m in &model.microservices {
        for key in m.annotations.keys() {
            if !model.catalog.contains(key) {
                issues.push(ValidationIssue::error(
                    IssueCode::UnknownAttribute,
                    &m.id,
                    format!("annotation key `{key}` is not in the attribute catalog"),
                ));
            }
        }
        if m.annotations.is_empty() {
            issues.push(ValidationIssue::warning(
                IssueCode::EmptyAnnotations,
                &m.id,
                "microservice carries no annotations",
            ));
        }
        if let Some(msg) = variant_ordering_violation(m) {
            issues.push(ValidationIssue::warning(IssueCode::VariantOrdering, &m.id, msg));
        }
        if let Some(table) = m.decision_table_ref.as_ref().and_then(|t| model.decision_tables.get(t)) {
            let can_skip = table.default_output == ModalityDecision::Skip
                || table.rules.iter().any(|r| r.output == ModalityDecision::Skip);
            if can_skip && !m.relevance.is_optional() {
                issues.push(ValidationIssue::warning(
                    IssueCode::MandatorySkip,
                    &m.id,
                    format!(
                        "table `{}` can output skip but the task is not optional; skip will be clamped to normal",
                        table.id
                    ),
                ));
            }
        }
    }
    for table in model.decision_tables.values() {
        issues.extend(validate_table(table, None));
    }
    issues
}

// Declared powers must satisfy LP <= N <= HP for every declared pair.
fn variant_ordering_violation(m: &Microservice) -> Option<String> {
    let v = &m.declared_variants;
    let power = |md| v.get(&md).map(|p: &ExecutionProfile| p.power_watts);
    let pairs = [
        (Modality::LowPower, Modality::Normal),
        (Modality::Normal, Modality::HighPerformance),
        (Modality::LowPower, Modality::HighPerformance),
    ];
    let broken: Vec<String> = pairs
        .iter()
        .filter_map(|&(lo, hi)| match (power(lo), power(hi)) {
            (Some(a), Some(b)) if a > b => Some(format!("{lo} {a} W > {hi} {b} W")),
            _ => None,
        })
        .collect();
    if broken.is_empty() {
        None
    } else {
        Some(format!("variant power ordering violated: {}", broken.join("; ")))
    }
}
