//! Canonical workflow JSON (format version `1.0`) and the decision-table
//! JSON shared by embedded `tables` and sidecar files.
//!
//! Serialization is canonical: object keys follow the field order of the
//! DTOs below, maps are sorted by key, lists keep model order and numbers
//! use the shortest representation that round-trips. The schema itself is
//! documented in `docs/format.md`.

use std::collections::BTreeMap;

use sadp_core::{
    build_application, ApplicationModel, AttributeCatalog, AttributeCategory, Comparator, Condition,
    DecisionTable, Edge, ExecutionProfile, HitPolicy, InputDecl, IssueCode, Microservice, Modality,
    ModalityDecision, ModelError, Relevance, Rule, ValidationIssue, Value, ValueKind,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Location, ParseError, ParseErrorCode};

pub const FORMAT_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    CanonicalJson,
    BpmnSubset,
}

/// A parsed workflow plus the findings produced while reading it (default
/// baseline values, ignored fields in lenient mode).
#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowDocument {
    pub format_version: String,
    pub application: ApplicationModel,
    pub source: Source,
    pub diagnostics: Vec<ValidationIssue>,
}

impl WorkflowDocument {
    pub fn new(application: ApplicationModel, source: Source) -> Self {
        WorkflowDocument { format_version: FORMAT_VERSION.into(), application, source, diagnostics: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParseOptions {
    /// Ignore unknown fields (reported as warnings) instead of rejecting them.
    pub lenient: bool,
}

// ---------------------------------------------------------------------------
// DTOs
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct DocDto {
    format_version: String,
    id: String,
    #[serde(default)]
    catalog: Option<Vec<CatalogEntryDto>>,
    tasks: Vec<TaskDto>,
    #[serde(default)]
    edges: Vec<EdgeDto>,
    #[serde(default)]
    tables: BTreeMap<String, TableDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct CatalogEntryDto {
    key: String,
    category: CategoryDto,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CategoryDto {
    Functional,
    Quality,
    Sustainability,
}

#[derive(Debug, Serialize, Deserialize)]
struct TaskDto {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relevance: Option<RelevanceDto>,
    #[serde(default)]
    annotations: BTreeMap<String, String>,
    #[serde(default)]
    baseline: ProfileDraft,
    #[serde(default)]
    variants: BTreeMap<ModalityDto, ProfileDraft>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RelevanceDto {
    Mandatory,
    Optional,
    Unannotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
enum ModalityDto {
    N,
    LP,
    HP,
}

impl From<ModalityDto> for Modality {
    fn from(m: ModalityDto) -> Self {
        match m {
            ModalityDto::N => Modality::Normal,
            ModalityDto::LP => Modality::LowPower,
            ModalityDto::HP => Modality::HighPerformance,
        }
    }
}

impl From<Modality> for ModalityDto {
    fn from(m: Modality) -> Self {
        match m {
            Modality::Normal => ModalityDto::N,
            Modality::LowPower => ModalityDto::LP,
            Modality::HighPerformance => ModalityDto::HP,
        }
    }
}

/// An execution profile whose fields may still be missing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileDraft {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_watts: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_units: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_score: Option<f64>,
}

impl ProfileDraft {
    fn full(p: &ExecutionProfile) -> Self {
        ProfileDraft {
            power_watts: Some(p.power_watts),
            duration_ms: Some(p.duration_ms),
            reward_units: Some(p.reward_units),
            quality_score: Some(p.quality_score),
        }
    }

    fn or_inherit(&self, base: &ExecutionProfile) -> ExecutionProfile {
        ExecutionProfile {
            power_watts: self.power_watts.unwrap_or(base.power_watts),
            duration_ms: self.duration_ms.unwrap_or(base.duration_ms),
            reward_units: self.reward_units.unwrap_or(base.reward_units),
            quality_score: self.quality_score.unwrap_or(base.quality_score),
        }
    }

    pub fn set(&mut self, field: ProfileField, value: f64) {
        match field {
            ProfileField::Power => self.power_watts = Some(value),
            ProfileField::Duration => self.duration_ms = Some(value),
            ProfileField::Reward => self.reward_units = Some(value),
            ProfileField::Quality => self.quality_score = Some(value),
        }
    }

    fn get(&self, field: ProfileField) -> Option<f64> {
        match field {
            ProfileField::Power => self.power_watts,
            ProfileField::Duration => self.duration_ms,
            ProfileField::Reward => self.reward_units,
            ProfileField::Quality => self.quality_score,
        }
    }
}

/// Annotation keys that feed the execution profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileField {
    Power,
    Duration,
    Reward,
    Quality,
}

impl ProfileField {
    pub const ALL: [ProfileField; 4] =
        [ProfileField::Power, ProfileField::Duration, ProfileField::Reward, ProfileField::Quality];

    pub fn annotation_key(self) -> &'static str {
        match self {
            ProfileField::Power => "power",
            ProfileField::Duration => "duration",
            ProfileField::Reward => "reward",
            ProfileField::Quality => "quality",
        }
    }

    pub fn from_annotation_key(key: &str) -> Option<Self> {
        ProfileField::ALL.into_iter().find(|f| f.annotation_key() == key)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeDto {
    from: String,
    to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct TableDto {
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    hit_policy: Option<HitPolicyDto>,
    #[serde(default)]
    default: Option<DecisionDto>,
    #[serde(default)]
    inputs: Vec<InputDto>,
    #[serde(default)]
    rules: Vec<RuleDto>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum HitPolicyDto {
    First,
    Unique,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum DecisionDto {
    Skip,
    Normal,
    LowPower,
    HighPerformance,
}

impl From<DecisionDto> for ModalityDecision {
    fn from(d: DecisionDto) -> Self {
        match d {
            DecisionDto::Skip => ModalityDecision::Skip,
            DecisionDto::Normal => ModalityDecision::UseNormal,
            DecisionDto::LowPower => ModalityDecision::UseLowPower,
            DecisionDto::HighPerformance => ModalityDecision::UseHighPerformance,
        }
    }
}

impl From<ModalityDecision> for DecisionDto {
    fn from(d: ModalityDecision) -> Self {
        match d {
            ModalityDecision::Skip => DecisionDto::Skip,
            ModalityDecision::UseNormal => DecisionDto::Normal,
            ModalityDecision::UseLowPower => DecisionDto::LowPower,
            ModalityDecision::UseHighPerformance => DecisionDto::HighPerformance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InputDto {
    name: String,
    kind: KindDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDto {
    Number,
    Boolean,
    String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RuleDto {
    #[serde(default)]
    when: Vec<WhenDto>,
    then: DecisionDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WhenDto {
    var: String,
    op: OpDto,
    value: serde_json::Value,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
enum OpDto {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl From<OpDto> for Comparator {
    fn from(op: OpDto) -> Self {
        match op {
            OpDto::Gt => Comparator::Gt,
            OpDto::Ge => Comparator::Ge,
            OpDto::Lt => Comparator::Lt,
            OpDto::Le => Comparator::Le,
            OpDto::Eq => Comparator::Eq,
            OpDto::Ne => Comparator::Ne,
        }
    }
}

impl From<Comparator> for OpDto {
    fn from(c: Comparator) -> Self {
        match c {
            Comparator::Gt => OpDto::Gt,
            Comparator::Ge => OpDto::Ge,
            Comparator::Lt => OpDto::Lt,
            Comparator::Le => OpDto::Le,
            Comparator::Eq => OpDto::Eq,
            Comparator::Ne => OpDto::Ne,
        }
    }
}

// ---------------------------------------------------------------------------
// Generic strict/lenient JSON reading
// ---------------------------------------------------------------------------

/// Deserializes `text` into `T`, tracking the element path of errors and of
/// fields the schema does not know.
pub(crate) fn read_json<T: DeserializeOwned>(
    text: &str,
    options: ParseOptions,
    diagnostics: &mut Vec<ValidationIssue>,
    subject: &str,
) -> Result<T, ParseError> {
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let mut track = |path: serde_ignored::Path<'_>| unknown.push(path.to_string());
    let ignored = serde_ignored::Deserializer::new(&mut de, &mut track);
    let value: T = serde_path_to_error::deserialize(ignored).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let location = Location::at(inner.line(), inner.column());
        match inner.classify() {
            serde_json::error::Category::Data => ParseError::new(
                ParseErrorCode::SchemaError,
                location.with_path(path),
                strip_position(&inner),
            ),
            _ => ParseError::new(ParseErrorCode::SyntaxError, location, strip_position(&inner)),
        }
    })?;
    de.end().map_err(|inner| {
        ParseError::new(
            ParseErrorCode::SyntaxError,
            Location::at(inner.line(), inner.column()),
            strip_position(&inner),
        )
    })?;
    if let Some(first) = unknown.first() {
        if !options.lenient {
            return Err(ParseError::schema(first.clone(), format!("unknown field `{first}`")));
        }
        for path in unknown {
            diagnostics.push(ValidationIssue::warning(
                IssueCode::UnknownField,
                subject,
                format!("ignored unknown field `{path}`"),
            ));
        }
    }
    Ok(value)
}

fn strip_position(err: &serde_json::Error) -> String {
    let text = err.to_string();
    match text.rfind(" at line ") {
        Some(i) => text[..i].to_string(),
        None => text,
    }
}

// ---------------------------------------------------------------------------
// Conversion: DTO -> model
// ---------------------------------------------------------------------------

/// Raw task data shared by the JSON and BPMN readers.
#[derive(Debug, Clone, Default)]
pub(crate) struct TaskDraft {
    pub id: String,
    pub name: Option<String>,
    pub relevance: Relevance,
    pub annotations: BTreeMap<String, String>,
    pub baseline: ProfileDraft,
    pub variants: BTreeMap<Modality, ProfileDraft>,
    pub table: Option<String>,
}

impl TaskDraft {
    /// Seeds missing baseline fields from numeric `power`, `duration`,
    /// `reward` and `quality` annotations (profile keys outside the catalog
    /// are consumed), applies defaults and resolves variant fields against
    /// the baseline.
    pub fn finish(mut self, catalog: &AttributeCatalog, diagnostics: &mut Vec<ValidationIssue>) -> Microservice {
        for field in ProfileField::ALL {
            let key = field.annotation_key();
            let Some(number) = self.annotations.get(key).and_then(|v| v.trim().parse::<f64>().ok()) else {
                continue;
            };
            if self.baseline.get(field).is_none() {
                self.baseline.set(field, number);
            }
            if !catalog.contains(key) {
                self.annotations.remove(key);
            }
        }
        let mut defaulted = Vec::new();
        if self.baseline.power_watts.is_none() {
            defaulted.push(format!("power_watts = {}", ExecutionProfile::DEFAULT_POWER_WATTS));
        }
        if self.baseline.duration_ms.is_none() {
            defaulted.push(format!("duration_ms = {}", ExecutionProfile::DEFAULT_DURATION_MS));
        }
        if !defaulted.is_empty() {
            diagnostics.push(ValidationIssue::warning(
                IssueCode::BaselineDefaulted,
                &self.id,
                format!("baseline profile incomplete, using defaults: {}", defaulted.join(", ")),
            ));
        }
        let baseline = self.baseline.or_inherit(&ExecutionProfile::default());
        let declared_variants = self.variants.iter().map(|(m, p)| (*m, p.or_inherit(&baseline))).collect();
        Microservice {
            name: self.name.unwrap_or_else(|| self.id.clone()),
            id: self.id,
            relevance: self.relevance,
            annotations: self.annotations,
            baseline_profile: baseline,
            declared_variants,
            decision_table_ref: self.table,
        }
    }
}

pub(crate) fn catalog_from_dto(entries: &[CatalogEntryDto], path: &str) -> Result<AttributeCatalog, ParseError> {
    AttributeCatalog::new(entries.iter().map(|e| {
        let category = match e.category {
            CategoryDto::Functional => AttributeCategory::Functional,
            CategoryDto::Quality => AttributeCategory::Quality,
            CategoryDto::Sustainability => AttributeCategory::Sustainability,
        };
        (e.key.clone(), category)
    }))
    .map_err(|e| ParseError::schema(path, e.to_string()))
}

fn literal_from_json(value: &serde_json::Value, decl: Option<&InputDto>, path: &str) -> Result<Value, ParseError> {
    match value {
        serde_json::Value::Number(n) => {
            let v = n.as_f64().ok_or_else(|| ParseError::schema(path, "number out of range"))?;
            Ok(Value::Number { value: v, unit: decl.and_then(|d| d.unit.clone()) })
        }
        serde_json::Value::Bool(b) => Ok(Value::Boolean(*b)),
        serde_json::Value::String(s) => Ok(Value::Text(s.clone())),
        _ => Err(ParseError::schema(path, "condition value must be a number, boolean or string")),
    }
}

pub(crate) fn table_from_dto(key: &str, dto: &TableDto, path: &str) -> Result<DecisionTable, ParseError> {
    if let Some(id) = &dto.id {
        if id != key {
            return Err(ParseError::schema(format!("{path}.id"), format!("table id `{id}` does not match key `{key}`")));
        }
    }
    let inputs = dto
        .inputs
        .iter()
        .map(|i| InputDecl {
            name: i.name.clone(),
            kind: match i.kind {
                KindDto::Number => ValueKind::Number,
                KindDto::Boolean => ValueKind::Boolean,
                KindDto::String => ValueKind::String,
            },
            unit: i.unit.clone(),
        })
        .collect();
    let mut rules = Vec::with_capacity(dto.rules.len());
    for (ri, rule) in dto.rules.iter().enumerate() {
        let mut conditions = Vec::with_capacity(rule.when.len());
        for (ci, w) in rule.when.iter().enumerate() {
            let cpath = format!("{path}.rules[{ri}].when[{ci}]");
            let decl = dto.inputs.iter().find(|i| i.name == w.var);
            let literal = literal_from_json(&w.value, decl, &format!("{cpath}.value"))?;
            let cond = Condition::new(w.var.clone(), w.op.into(), literal)
                .map_err(|e| ParseError::schema(format!("{cpath}.op"), e.to_string()))?;
            conditions.push(cond);
        }
        rules.push(Rule { conditions, output: rule.then.into(), label: rule.label.clone() });
    }
    Ok(DecisionTable {
        id: key.to_string(),
        inputs,
        rules,
        hit_policy: match dto.hit_policy {
            Some(HitPolicyDto::Unique) => HitPolicy::Unique,
            Some(HitPolicyDto::First) | None => HitPolicy::First,
        },
        default_output: dto.default.map_or(ModalityDecision::UseNormal, Into::into),
    })
}

pub(crate) fn table_to_dto(table: &DecisionTable) -> TableDto {
    TableDto {
        id: Some(table.id.clone()),
        hit_policy: Some(match table.hit_policy {
            HitPolicy::First => HitPolicyDto::First,
            HitPolicy::Unique => HitPolicyDto::Unique,
        }),
        default: Some(table.default_output.into()),
        inputs: table
            .inputs
            .iter()
            .map(|i| InputDto {
                name: i.name.clone(),
                kind: match i.kind {
                    ValueKind::Number => KindDto::Number,
                    ValueKind::Boolean => KindDto::Boolean,
                    ValueKind::String => KindDto::String,
                },
                unit: i.unit.clone(),
            })
            .collect(),
        rules: table
            .rules
            .iter()
            .map(|r| RuleDto {
                when: r
                    .conditions
                    .iter()
                    .map(|c| WhenDto {
                        var: c.variable.clone(),
                        op: c.comparator.into(),
                        value: match &c.literal {
                            Value::Number { value, .. } => serde_json::json!(value),
                            Value::Boolean(b) => serde_json::Value::Bool(*b),
                            Value::Text(s) => serde_json::Value::String(s.clone()),
                        },
                    })
                    .collect(),
                then: r.output.into(),
                label: r.label.clone(),
            })
            .collect(),
    }
}

/// Builds the model and maps structural errors back to the offending
/// element via `locate`.
pub(crate) fn build_located(
    id: String,
    tasks: Vec<Microservice>,
    edges: Vec<Edge>,
    tables: BTreeMap<String, DecisionTable>,
    catalog: AttributeCatalog,
    locate: impl Fn(&ModelError, &[Microservice], &[Edge]) -> Location,
) -> Result<ApplicationModel, ParseError> {
    let (tasks_copy, edges_copy) = (tasks.clone(), edges.clone());
    build_application(id, tasks, edges, tables, catalog)
        .map_err(|e| ParseError::semantic(locate(&e, &tasks_copy, &edges_copy), e))
}

fn json_locate(err: &ModelError, tasks: &[Microservice], edges: &[Edge]) -> Location {
    let task_index = |id: &str| tasks.iter().position(|t| t.id == id);
    match err {
        ModelError::EmptyModel => Location::path("tasks"),
        ModelError::EmptyId => {
            let i = tasks.iter().position(|t| t.id.is_empty()).unwrap_or(0);
            Location::path(format!("tasks[{i}].id"))
        }
        ModelError::DuplicateId(id) => {
            let i = tasks.iter().enumerate().filter(|(_, t)| &t.id == id).nth(1).map_or(0, |(i, _)| i);
            Location::path(format!("tasks[{i}].id"))
        }
        ModelError::DanglingEdge { from, to } => {
            let i = edges.iter().position(|e| &e.from_id == from && &e.to_id == to).unwrap_or(0);
            Location::path(format!("edges[{i}]"))
        }
        ModelError::SelfLoop(id) => {
            let i = edges.iter().position(|e| &e.from_id == id && &e.to_id == id).unwrap_or(0);
            Location::path(format!("edges[{i}]"))
        }
        ModelError::CycleDetected(_) => Location::path("edges"),
        ModelError::UnknownTableRef { task, .. } => {
            Location::path(format!("tasks[{}].table", task_index(task).unwrap_or(0)))
        }
        ModelError::TableIdMismatch { key, .. } => Location::path(format!("tables.{key}.id")),
        ModelError::InvalidProfile { task, .. } => Location::path(format!("tasks[{}]", task_index(task).unwrap_or(0))),
        ModelError::InvalidCatalog(_) => Location::path("catalog"),
    }
}

/// Strict parse of a canonical workflow document.
pub fn parse_workflow_json(text: &str) -> Result<WorkflowDocument, ParseError> {
    parse_workflow_json_with(text, ParseOptions::default())
}

pub fn parse_workflow_json_with(text: &str, options: ParseOptions) -> Result<WorkflowDocument, ParseError> {
    let mut diagnostics = Vec::new();
    let dto: DocDto = read_json(text, options, &mut diagnostics, "document")?;
    if dto.format_version != FORMAT_VERSION {
        return Err(ParseError::schema(
            "format_version",
            format!("unsupported format version `{}` (expected `{FORMAT_VERSION}`)", dto.format_version),
        ));
    }
    let catalog = match &dto.catalog {
        Some(entries) => catalog_from_dto(entries, "catalog")?,
        None => AttributeCatalog::default(),
    };
    let mut tables = BTreeMap::new();
    for (key, t) in &dto.tables {
        tables.insert(key.clone(), table_from_dto(key, t, &format!("tables.{key}"))?);
    }
    let tasks: Vec<Microservice> = dto
        .tasks
        .into_iter()
        .map(|t| {
            TaskDraft {
                id: t.id,
                name: t.name,
                relevance: match t.relevance {
                    Some(RelevanceDto::Mandatory) => Relevance::Mandatory,
                    Some(RelevanceDto::Optional) => Relevance::Optional,
                    Some(RelevanceDto::Unannotated) | None => Relevance::Unannotated,
                },
                annotations: t.annotations,
                baseline: t.baseline,
                variants: t.variants.into_iter().map(|(k, v)| (k.into(), v)).collect(),
                table: t.table,
            }
            .finish(&catalog, &mut diagnostics)
        })
        .collect();
    let edges = dto.edges.into_iter().map(|e| Edge::new(e.from, e.to)).collect();
    let application = build_located(dto.id, tasks, edges, tables, catalog, json_locate)?;
    Ok(WorkflowDocument {
        format_version: dto.format_version,
        application,
        source: Source::CanonicalJson,
        diagnostics,
    })
}

/// Canonical JSON text of a document (pretty-printed, trailing newline).
pub fn serialize_workflow(doc: &WorkflowDocument) -> String {
    let model = &doc.application;
    let dto = DocDto {
        format_version: FORMAT_VERSION.into(),
        id: model.id().to_string(),
        catalog: Some(
            model
                .catalog()
                .iter()
                .map(|(key, category)| CatalogEntryDto {
                    key: key.to_string(),
                    category: match category {
                        AttributeCategory::Functional => CategoryDto::Functional,
                        AttributeCategory::Quality => CategoryDto::Quality,
                        AttributeCategory::Sustainability => CategoryDto::Sustainability,
                    },
                })
                .collect(),
        ),
        tasks: model
            .microservices()
            .iter()
            .map(|m| TaskDto {
                id: m.id.clone(),
                name: Some(m.name.clone()),
                relevance: match m.relevance {
                    Relevance::Mandatory => Some(RelevanceDto::Mandatory),
                    Relevance::Optional => Some(RelevanceDto::Optional),
                    Relevance::Unannotated => None,
                },
                annotations: m.annotations.clone(),
                baseline: ProfileDraft::full(&m.baseline_profile),
                variants: m.declared_variants.iter().map(|(k, p)| ((*k).into(), ProfileDraft::full(p))).collect(),
                table: m.decision_table_ref.clone(),
            })
            .collect(),
        edges: model.edges().iter().map(|e| EdgeDto { from: e.from_id.clone(), to: e.to_id.clone() }).collect(),
        tables: model.decision_tables().iter().map(|(k, t)| (k.clone(), table_to_dto(t))).collect(),
    };
    let mut text = serde_json::to_string_pretty(&dto).expect("workflow DTOs always serialize");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Sidecar tables and catalogs
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SidecarDto {
    Map(BTreeMap<String, TableDto>),
    List(Vec<TableDto>),
}

/// Reads a decision-table sidecar: either an object keyed by table id or a
/// list of tables each carrying an `id`.
pub fn parse_tables_json(text: &str) -> Result<BTreeMap<String, DecisionTable>, ParseError> {
    let mut ignored = Vec::new();
    // Untagged enums cannot report unknown fields precisely; sidecars are
    // read leniently and re-checked table by table below.
    let dto: SidecarDto = read_json(text, ParseOptions { lenient: true }, &mut ignored, "tables")?;
    let mut out = BTreeMap::new();
    match dto {
        SidecarDto::Map(map) => {
            for (key, t) in &map {
                out.insert(key.clone(), table_from_dto(key, t, key)?);
            }
        }
        SidecarDto::List(list) => {
            for (i, t) in list.iter().enumerate() {
                let path = format!("[{i}]");
                let id = t.id.clone().ok_or_else(|| ParseError::schema(format!("{path}.id"), "missing field `id`"))?;
                if out.contains_key(&id) {
                    return Err(ParseError::schema(format!("{path}.id"), format!("duplicate table id `{id}`")));
                }
                out.insert(id.clone(), table_from_dto(&id, t, &path)?);
            }
        }
    }
    Ok(out)
}

/// Reads a catalog file: a list of `{key, category}` entries.
pub fn parse_catalog_json(text: &str) -> Result<AttributeCatalog, ParseError> {
    let mut ignored = Vec::new();
    let entries: Vec<CatalogEntryDto> = read_json(text, ParseOptions::default(), &mut ignored, "catalog")?;
    catalog_from_dto(&entries, "catalog")
}

/// Adds (or replaces) decision tables on an existing model.
pub fn attach_tables(
    model: &ApplicationModel,
    extra: BTreeMap<String, DecisionTable>,
) -> Result<ApplicationModel, ModelError> {
    let (id, tasks, edges, mut tables, catalog) = model.clone().into_parts();
    tables.extend(extra);
    build_application(id, tasks, edges, tables, catalog)
}
