//! Import of a restricted BPMN 2.0 subset carrying sustainability
//! annotations.
//!
//! Accepted inside the single `process`: `task`, `serviceTask`,
//! `businessRuleTask`, `parallelGateway`, `startEvent`, `endEvent`,
//! `sequenceFlow`, `textAnnotation` and `association`. Gateways, events and
//! business-rule tasks are pass-through nodes: edges between tasks are
//! derived by following sequence flows through them. Task markers use the
//! `sadp` namespace (`urn:sadp:1.0`): `sadp:relevance`, `sadp:variants`,
//! and `sadp:table` on business-rule tasks.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use roxmltree::{Document, Node};
use sadp_core::{AttributeCatalog, DecisionTable, Edge, Modality, ModelError, Relevance};

use crate::error::{Location, ParseError, ParseErrorCode};
use crate::workflow::{build_located, ParseOptions, ProfileDraft, ProfileField, Source, TaskDraft, WorkflowDocument};

pub const BPMN_NAMESPACE: &str = "http://www.omg.org/spec/BPMN/20100524/MODEL";
pub const SADP_NAMESPACE: &str = "urn:sadp:1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    Task,
    RuleTask,
    Gateway,
    Event,
}

struct FlowNode<'a, 'input> {
    kind: NodeKind,
    node: Node<'a, 'input>,
}

/// Imports with the default catalog, no sidecar tables and strict parsing.
pub fn import_bpmn_subset(xml: &str) -> Result<WorkflowDocument, ParseError> {
    import_bpmn_subset_with(xml, BTreeMap::new(), AttributeCatalog::default(), ParseOptions::default())
}

pub fn import_bpmn_subset_with(
    xml: &str,
    tables: BTreeMap<String, DecisionTable>,
    catalog: AttributeCatalog,
    _options: ParseOptions,
) -> Result<WorkflowDocument, ParseError> {
    let doc = Document::parse(xml).map_err(|e| {
        let pos = e.pos();
        ParseError::new(ParseErrorCode::SyntaxError, Location::at(pos.row as usize, pos.col as usize), e.to_string())
    })?;
    let at = |node: Node| {
        let pos = doc.text_pos_at(node.range().start);
        Location::at(pos.row as usize, pos.col as usize)
    };

    let root = doc.root_element();
    if !is_bpmn(root, "definitions") {
        return Err(ParseError::new(
            ParseErrorCode::UnsupportedElement,
            at(root),
            format!("expected a BPMN `definitions` root, found `{}`", root.tag_name().name()),
        ));
    }
    let mut process = None;
    for child in root.children().filter(|n| n.is_element()) {
        if child.tag_name().namespace() != Some(BPMN_NAMESPACE) {
            continue;
        }
        match child.tag_name().name() {
            "process" if process.is_none() => process = Some(child),
            "process" => {
                return Err(ParseError::new(
                    ParseErrorCode::UnsupportedElement,
                    at(child),
                    "only a single `process` is supported",
                ))
            }
            // Vendor metadata, not part of the workflow.
            "documentation" | "extensionElements" => {}
            other => {
                return Err(ParseError::new(ParseErrorCode::UnsupportedElement, at(child), format!("unsupported element `{other}`")))
            }
        }
    }
    let process = process.ok_or_else(|| {
        ParseError::new(ParseErrorCode::UnsupportedElement, at(root), "no `process` element")
    })?;
    let app_id = process.attribute("id").unwrap_or_default().to_string();

    let mut nodes: Vec<(String, FlowNode)> = Vec::new();
    let mut flows = Vec::new();
    let mut annotations: HashMap<String, Node> = HashMap::new();
    let mut associations = Vec::new();
    let mut seen_ids: HashMap<String, Node> = HashMap::new();

    for child in process.children().filter(|n| n.is_element()) {
        if child.tag_name().namespace() != Some(BPMN_NAMESPACE) {
            continue;
        }
        let name = child.tag_name().name();
        let kind = match name {
            "task" | "serviceTask" => Some(NodeKind::Task),
            "businessRuleTask" => Some(NodeKind::RuleTask),
            "parallelGateway" => Some(NodeKind::Gateway),
            "startEvent" | "endEvent" => Some(NodeKind::Event),
            "sequenceFlow" | "textAnnotation" | "association" | "documentation" | "extensionElements" => None,
            other => {
                return Err(ParseError::new(
                    ParseErrorCode::UnsupportedElement,
                    at(child),
                    format!("unsupported element `{other}`"),
                ))
            }
        };
        if matches!(name, "documentation" | "extensionElements") {
            continue;
        }
        let id = child.attribute("id").ok_or_else(|| {
            ParseError::new(ParseErrorCode::SchemaError, at(child), format!("`{name}` without an `id` attribute"))
        })?;
        if seen_ids.insert(id.to_string(), child).is_some() {
            return Err(ParseError::semantic(at(child), ModelError::DuplicateId(id.to_string())));
        }
        match name {
            "sequenceFlow" => {
                let source = required_attr(child, "sourceRef", at(child))?;
                let target = required_attr(child, "targetRef", at(child))?;
                flows.push((source.to_string(), target.to_string(), child));
            }
            "textAnnotation" => {
                annotations.insert(id.to_string(), child);
            }
            "association" => associations.push(child),
            _ => nodes.push((id.to_string(), FlowNode { kind: kind.expect("flow node"), node: child })),
        }
        check_children(child, &at)?;
    }

    let kinds: HashMap<&str, NodeKind> = nodes.iter().map(|(id, n)| (id.as_str(), n.kind)).collect();
    let mut successors: HashMap<&str, Vec<&str>> = HashMap::new();
    for (source, target, flow) in &flows {
        for end in [source, target] {
            if !kinds.contains_key(end.as_str()) {
                return Err(ParseError::semantic(
                    at(*flow),
                    ModelError::DanglingEdge { from: source.clone(), to: target.clone() },
                ));
            }
        }
        successors.entry(source.as_str()).or_default().push(target.as_str());
    }

    // Task edges: follow flows through pass-through nodes until a task.
    let mut edges = Vec::new();
    for (id, node) in &nodes {
        if node.kind != NodeKind::Task {
            continue;
        }
        let mut visited = BTreeSet::new();
        let mut reached = Vec::new();
        let mut stack: Vec<&str> = successors.get(id.as_str()).map(|v| v.iter().rev().copied().collect()).unwrap_or_default();
        while let Some(next) = stack.pop() {
            if kinds[next] == NodeKind::Task {
                if !reached.contains(&next) {
                    reached.push(next);
                }
                continue;
            }
            if !visited.insert(next) {
                continue;
            }
            if let Some(more) = successors.get(next) {
                stack.extend(more.iter().rev().copied());
            }
        }
        edges.extend(reached.into_iter().map(|to| Edge::new(id.clone(), to)));
    }

    // Business-rule tasks attach their table to the task they flow into.
    let mut table_refs: HashMap<&str, String> = HashMap::new();
    for (id, node) in &nodes {
        if node.kind != NodeKind::RuleTask {
            continue;
        }
        let table = node.node.attribute((SADP_NAMESPACE, "table")).ok_or_else(|| {
            ParseError::new(ParseErrorCode::MalformedAnnotation, at(node.node), format!("businessRuleTask `{id}` has no sadp:table attribute"))
        })?;
        let targets = successors.get(id.as_str()).map(Vec::as_slice).unwrap_or_default();
        let task = match targets {
            [only] if kinds[only] == NodeKind::Task => *only,
            _ => {
                return Err(ParseError::new(
                    ParseErrorCode::UnsupportedElement,
                    at(node.node),
                    format!("businessRuleTask `{id}` must flow directly into exactly one task"),
                ))
            }
        };
        if table_refs.insert(task, table.to_string()).is_some() {
            return Err(ParseError::new(
                ParseErrorCode::UnsupportedElement,
                at(node.node),
                format!("task `{task}` is preceded by more than one businessRuleTask"),
            ));
        }
    }

    let mut attached: HashMap<&str, Vec<Node>> = HashMap::new();
    for assoc in &associations {
        let source = required_attr(*assoc, "sourceRef", at(*assoc))?;
        let target = required_attr(*assoc, "targetRef", at(*assoc))?;
        let is_task = |r: &str| kinds.get(r) == Some(&NodeKind::Task);
        let (task, note) = if is_task(source) && annotations.contains_key(target) {
            (source, target)
        } else if is_task(target) && annotations.contains_key(source) {
            (target, source)
        } else {
            return Err(ParseError::new(
                ParseErrorCode::DanglingAssociation,
                at(*assoc),
                format!("association `{source}` -> `{target}` must link a task and a textAnnotation"),
            ));
        };
        let task = nodes.iter().find(|(id, _)| id == task).map(|(id, _)| id.as_str()).expect("known task");
        attached.entry(task).or_default().push(annotations[note]);
    }

    let mut diagnostics = Vec::new();
    let mut element_of: HashMap<String, Location> = HashMap::new();
    let mut tasks = Vec::new();
    for (id, node) in &nodes {
        if node.kind != NodeKind::Task {
            continue;
        }
        element_of.insert(id.clone(), at(node.node));
        let mut draft = TaskDraft {
            id: id.clone(),
            name: node.node.attribute("name").map(str::to_string),
            table: table_refs.get(id.as_str()).cloned(),
            ..TaskDraft::default()
        };
        draft.relevance = match node.node.attribute((SADP_NAMESPACE, "relevance")) {
            None => Relevance::Unannotated,
            Some("optional") => Relevance::Optional,
            Some("mandatory") => Relevance::Mandatory,
            Some(other) => {
                return Err(ParseError::new(
                    ParseErrorCode::MalformedAnnotation,
                    at(node.node),
                    format!("unknown sadp:relevance `{other}` (expected optional or mandatory)"),
                ))
            }
        };
        if let Some(list) = node.node.attribute((SADP_NAMESPACE, "variants")) {
            for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let modality = Modality::from_token(token).ok_or_else(|| {
                    ParseError::new(ParseErrorCode::MalformedAnnotation, at(node.node), format!("unknown variant `{token}` in sadp:variants"))
                })?;
                draft.variants.insert(modality, ProfileDraft::default());
            }
        }
        for note in attached.get(id.as_str()).into_iter().flatten() {
            read_annotation(&doc, *note, &mut draft)?;
        }
        tasks.push(draft.finish(&catalog, &mut diagnostics));
    }

    let locate = |err: &ModelError, _: &[sadp_core::Microservice], _: &[Edge]| {
        let subject = match err {
            ModelError::DuplicateId(id) | ModelError::SelfLoop(id) => Some(id),
            ModelError::DanglingEdge { from, .. } => Some(from),
            ModelError::UnknownTableRef { task, .. } | ModelError::InvalidProfile { task, .. } => Some(task),
            ModelError::CycleDetected(ids) => ids.first(),
            _ => None,
        };
        subject.and_then(|id| element_of.get(id).cloned()).unwrap_or_else(|| at(process))
    };
    let application = build_located(app_id, tasks, edges, tables, catalog, locate)?;
    Ok(WorkflowDocument { format_version: crate::workflow::FORMAT_VERSION.into(), application, source: Source::BpmnSubset, diagnostics })
}

fn is_bpmn(node: Node, name: &str) -> bool {
    node.tag_name().namespace() == Some(BPMN_NAMESPACE) && node.tag_name().name() == name
}

fn required_attr<'a>(node: Node<'a, '_>, name: &str, location: Location) -> Result<&'a str, ParseError> {
    node.attribute(name).ok_or_else(|| {
        ParseError::new(
            ParseErrorCode::SchemaError,
            location,
            format!("`{}` without a `{name}` attribute", node.tag_name().name()),
        )
    })
}

/// Rejects BPMN child elements that would carry semantics the subset does
/// not model (loop characteristics, conditions, boundary timers ...).
fn check_children(node: Node, at: &impl Fn(Node) -> Location) -> Result<(), ParseError> {
    for child in node.children().filter(|n| n.is_element()) {
        if child.tag_name().namespace() != Some(BPMN_NAMESPACE) {
            continue;
        }
        match child.tag_name().name() {
            "incoming" | "outgoing" | "documentation" | "extensionElements" => {}
            "text" if is_bpmn(node, "textAnnotation") => {}
            other => {
                return Err(ParseError::new(
                    ParseErrorCode::UnsupportedElement,
                    at(child),
                    format!("unsupported element `{other}` inside `{}`", node.tag_name().name()),
                ))
            }
        }
    }
    Ok(())
}

/// Parses `key: value` lines. `key@LP: value` scopes a profile value to a
/// declared variant.
fn read_annotation(doc: &Document, note: Node, draft: &mut TaskDraft) -> Result<(), ParseError> {
    let Some(text_node) = note.children().find(|n| is_bpmn(*n, "text")) else {
        return Ok(());
    };
    let body = text_node.text().unwrap_or_default();
    let start = text_node.first_child().map_or(text_node.range().start, |t| t.range().start);
    let first_row = doc.text_pos_at(start).row as usize;
    for (offset, raw) in body.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let location = Location::at(first_row + offset, 1).with_path(format!("{}/{}", draft.id, note.attribute("id").unwrap_or_default()));
        let malformed = |message: String| ParseError::new(ParseErrorCode::MalformedAnnotation, location.clone(), message);
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| malformed(format!("annotation line `{line}` is not of the form `key: value`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(malformed(format!("annotation line `{line}` has an empty key")));
        }
        match key.split_once('@') {
            Some((base, token)) => {
                let modality = Modality::from_token(token.trim())
                    .ok_or_else(|| malformed(format!("unknown modality `{token}` in `{key}`")))?;
                let field = ProfileField::from_annotation_key(base.trim())
                    .ok_or_else(|| malformed(format!("`{base}` cannot be scoped to a variant")))?;
                let number: f64 = value.parse().map_err(|_| malformed(format!("`{key}` needs a numeric value, got `{value}`")))?;
                let variant = draft
                    .variants
                    .get_mut(&modality)
                    .ok_or_else(|| malformed(format!("`{key}` names a variant not listed in sadp:variants")))?;
                variant.set(field, number);
            }
            None => {
                if draft.annotations.insert(key.to_string(), value.to_string()).is_some() {
                    return Err(malformed(format!("duplicate annotation key `{key}`")));
                }
            }
        }
    }
    Ok(())
}
