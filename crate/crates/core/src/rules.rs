//! Decision tables: ordered if-then rules over monitored context variables
//! producing a per-task [`ModalityDecision`].
//!
//! A rule is a conjunction of [`Condition`]s; disjunction is expressed with
//! several rules. Numeric values carry a unit tag that must match exactly,
//! there is no unit conversion.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{IssueCode, Modality, ValidationIssue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Number,
    Boolean,
    String,
}

impl ValueKind {
    pub fn token(self) -> &'static str {
        match self {
            ValueKind::Number => "number",
            ValueKind::Boolean => "boolean",
            ValueKind::String => "string",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "number" => Some(ValueKind::Number),
            "boolean" => Some(ValueKind::Boolean),
            "string" => Some(ValueKind::String),
            _ => None,
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number { value: f64, unit: Option<String> },
    Boolean(bool),
    Text(String),
}

impl Value {
    pub fn number(value: f64, unit: Option<&str>) -> Self {
        Value::Number { value, unit: unit.map(String::from) }
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Number { .. } => ValueKind::Number,
            Value::Boolean(_) => ValueKind::Boolean,
            Value::Text(_) => ValueKind::String,
        }
    }

    pub fn unit(&self) -> Option<&str> {
        match self {
            Value::Number { unit, .. } => unit.as_deref(),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number { value, unit: Some(u) } => write!(f, "{value} {u}"),
            Value::Number { value, unit: None } => write!(f, "{value}"),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "\"{s}\""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuleError {
    #[error("context is missing variable `{0}`")]
    MissingVariable(String),
    #[error("variable `{variable}` is a {found}, expected {expected}")]
    KindMismatch { variable: String, expected: ValueKind, found: ValueKind },
    #[error("variable `{variable}` has unit {}, expected {}", unit_label(.found), unit_label(.expected))]
    UnitMismatch { variable: String, expected: Option<String>, found: Option<String> },
    #[error("comparator `{comparator}` is not defined for {kind} values")]
    InvalidComparator { comparator: Comparator, kind: ValueKind },
    #[error("table `{table}`: several rules match under unique hit policy: {}", .labels.join(", "))]
    NonUniqueHit { table: String, labels: Vec<String> },
    #[error("variable `{0}` is not finite")]
    NonFinite(String),
    #[error("variable `{0}` is already set")]
    DuplicateVariable(String),
}

fn unit_label(unit: &Option<String>) -> &str {
    unit.as_deref().unwrap_or("none")
}

/// Values of the monitored variables when a request is handled.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContextSnapshot {
    variables: BTreeMap<String, Value>,
}

impl ContextSnapshot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) -> Result<(), RuleError> {
        let name = name.into();
        if let Value::Number { value: v, .. } = &value {
            if !v.is_finite() {
                return Err(RuleError::NonFinite(name));
            }
        }
        if self.variables.contains_key(&name) {
            return Err(RuleError::DuplicateVariable(name));
        }
        self.variables.insert(name, value);
        Ok(())
    }

    /// Builder form of [`insert`](Self::insert).
    pub fn with(mut self, name: impl Into<String>, value: Value) -> Result<Self, RuleError> {
        self.insert(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.variables.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.variables.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
}

impl Comparator {
    pub const ALL: [Comparator; 6] =
        [Comparator::Gt, Comparator::Ge, Comparator::Lt, Comparator::Le, Comparator::Eq, Comparator::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "==",
            Comparator::Ne => "!=",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Self> {
        Comparator::ALL.into_iter().find(|c| c.symbol() == symbol)
    }

    pub fn is_equality(self) -> bool {
        matches!(self, Comparator::Eq | Comparator::Ne)
    }

    fn compare_numbers(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparator::Gt => lhs > rhs,
            Comparator::Ge => lhs >= rhs,
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ne => lhs != rhs,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `variable <comparator> literal`, with the context value on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub variable: String,
    pub comparator: Comparator,
    pub literal: Value,
}

impl Condition {
    pub fn new(variable: impl Into<String>, comparator: Comparator, literal: Value) -> Result<Self, RuleError> {
        if literal.kind() != ValueKind::Number && !comparator.is_equality() {
            return Err(RuleError::InvalidComparator { comparator, kind: literal.kind() });
        }
        Ok(Condition { variable: variable.into(), comparator, literal })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.variable, self.comparator, self.literal)
    }
}

/// Per-task outcome of a decision table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModalityDecision {
    Skip,
    UseNormal,
    UseLowPower,
    UseHighPerformance,
}

impl ModalityDecision {
    pub const ALL: [ModalityDecision; 4] = [
        ModalityDecision::Skip,
        ModalityDecision::UseNormal,
        ModalityDecision::UseLowPower,
        ModalityDecision::UseHighPerformance,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ModalityDecision::Skip => "skip",
            ModalityDecision::UseNormal => "normal",
            ModalityDecision::UseLowPower => "low-power",
            ModalityDecision::UseHighPerformance => "high-performance",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        ModalityDecision::ALL.into_iter().find(|d| d.token() == token)
    }

    /// The variant a decision asks for, `None` for skip.
    pub fn modality(self) -> Option<Modality> {
        match self {
            ModalityDecision::Skip => None,
            ModalityDecision::UseNormal => Some(Modality::Normal),
            ModalityDecision::UseLowPower => Some(Modality::LowPower),
            ModalityDecision::UseHighPerformance => Some(Modality::HighPerformance),
        }
    }
}

impl From<Modality> for ModalityDecision {
    fn from(m: Modality) -> Self {
        match m {
            Modality::Normal => ModalityDecision::UseNormal,
            Modality::LowPower => ModalityDecision::UseLowPower,
            Modality::HighPerformance => ModalityDecision::UseHighPerformance,
        }
    }
}

impl fmt::Display for ModalityDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub output: ModalityDecision,
    pub label: Option<String>,
}

impl Rule {
    pub fn new(conditions: Vec<Condition>, output: ModalityDecision) -> Self {
        Rule { conditions, output, label: None }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    fn display_label(&self, position: usize) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => format!("#{}", position + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HitPolicy {
    #[default]
    First,
    Unique,
}

impl HitPolicy {
    pub fn token(self) -> &'static str {
        match self {
            HitPolicy::First => "first",
            HitPolicy::Unique => "unique",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "first" => Some(HitPolicy::First),
            "unique" => Some(HitPolicy::Unique),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputDecl {
    pub name: String,
    pub kind: ValueKind,
    pub unit: Option<String>,
}

impl InputDecl {
    pub fn number(name: impl Into<String>, unit: Option<&str>) -> Self {
        InputDecl { name: name.into(), kind: ValueKind::Number, unit: unit.map(String::from) }
    }

    pub fn boolean(name: impl Into<String>) -> Self {
        InputDecl { name: name.into(), kind: ValueKind::Boolean, unit: None }
    }

    pub fn string(name: impl Into<String>) -> Self {
        InputDecl { name: name.into(), kind: ValueKind::String, unit: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTable {
    pub id: String,
    pub inputs: Vec<InputDecl>,
    pub rules: Vec<Rule>,
    pub hit_policy: HitPolicy,
    pub default_output: ModalityDecision,
}

impl DecisionTable {
    /// Empty first-hit table defaulting to normal execution.
    pub fn new(id: impl Into<String>) -> Self {
        DecisionTable {
            id: id.into(),
            inputs: Vec::new(),
            rules: Vec::new(),
            hit_policy: HitPolicy::First,
            default_output: ModalityDecision::UseNormal,
        }
    }

    pub fn input(mut self, input: InputDecl) -> Self {
        self.inputs.push(input);
        self
    }

    pub fn rule(mut self, rule: Rule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn hit_policy(mut self, policy: HitPolicy) -> Self {
        self.hit_policy = policy;
        self
    }

    pub fn default_output(mut self, output: ModalityDecision) -> Self {
        self.default_output = output;
        self
    }

    pub fn declared(&self, name: &str) -> Option<&InputDecl> {
        self.inputs.iter().find(|i| i.name == name)
    }
}

pub fn evaluate_condition(cond: &Condition, ctx: &ContextSnapshot) -> Result<bool, RuleError> {
    let actual = ctx
        .get(&cond.variable)
        .ok_or_else(|| RuleError::MissingVariable(cond.variable.clone()))?;
    if actual.kind() != cond.literal.kind() {
        return Err(RuleError::KindMismatch {
            variable: cond.variable.clone(),
            expected: cond.literal.kind(),
            found: actual.kind(),
        });
    }
    match (actual, &cond.literal) {
        (Value::Number { value: lhs, unit: lu }, Value::Number { value: rhs, unit: ru }) => {
            if lu != ru {
                return Err(RuleError::UnitMismatch {
                    variable: cond.variable.clone(),
                    expected: ru.clone(),
                    found: lu.clone(),
                });
            }
            Ok(cond.comparator.compare_numbers(*lhs, *rhs))
        }
        (lhs, rhs) => match cond.comparator {
            Comparator::Eq => Ok(lhs == rhs),
            Comparator::Ne => Ok(lhs != rhs),
            comparator => Err(RuleError::InvalidComparator { comparator, kind: lhs.kind() }),
        },
    }
}

fn check_inputs(table: &DecisionTable, ctx: &ContextSnapshot) -> Result<(), RuleError> {
    for input in &table.inputs {
        let value = ctx.get(&input.name).ok_or_else(|| RuleError::MissingVariable(input.name.clone()))?;
        if value.kind() != input.kind {
            return Err(RuleError::KindMismatch {
                variable: input.name.clone(),
                expected: input.kind,
                found: value.kind(),
            });
        }
        if input.kind == ValueKind::Number && value.unit() != input.unit.as_deref() {
            return Err(RuleError::UnitMismatch {
                variable: input.name.clone(),
                expected: input.unit.clone(),
                found: value.unit().map(String::from),
            });
        }
    }
    Ok(())
}

fn rule_matches(rule: &Rule, ctx: &ContextSnapshot) -> Result<bool, RuleError> {
    for cond in &rule.conditions {
        if !evaluate_condition(cond, ctx)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Applies the table's hit policy to `ctx`; falls back to `default_output`
/// when no rule matches.
pub fn evaluate_table(table: &DecisionTable, ctx: &ContextSnapshot) -> Result<ModalityDecision, RuleError> {
    check_inputs(table, ctx)?;
    match table.hit_policy {
        HitPolicy::First => {
            for rule in &table.rules {
                if rule_matches(rule, ctx)? {
                    return Ok(rule.output);
                }
            }
            Ok(table.default_output)
        }
        HitPolicy::Unique => {
            let mut hits = Vec::new();
            for (i, rule) in table.rules.iter().enumerate() {
                if rule_matches(rule, ctx)? {
                    hits.push(i);
                }
            }
            match hits.as_slice() {
                [] => Ok(table.default_output),
                [only] => Ok(table.rules[*only].output),
                many => Err(RuleError::NonUniqueHit {
                    table: table.id.clone(),
                    labels: many.iter().map(|&i| table.rules[i].display_label(i)).collect(),
                }),
            }
        }
    }
}

/// Static checks of a table. With `known_variables`, inputs outside that set
/// are reported as unknown.
pub fn validate_table(table: &DecisionTable, known_variables: Option<&BTreeSet<String>>) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let subject = table.id.as_str();

    let mut seen = BTreeSet::new();
    for input in &table.inputs {
        if !seen.insert(input.name.as_str()) {
            issues.push(ValidationIssue::error(
                IssueCode::KindMismatch,
                subject,
                format!("input `{}` is declared twice", input.name),
            ));
        }
        if let Some(known) = known_variables {
            if !known.contains(&input.name) {
                issues.push(ValidationIssue::error(
                    IssueCode::UnknownVariable,
                    subject,
                    format!("input `{}` is not a known context variable", input.name),
                ));
            }
        }
    }

    // Region of each rule, or None when one of its conditions is malformed.
    let mut regions: Vec<Option<Region>> = Vec::with_capacity(table.rules.len());
    for (i, rule) in table.rules.iter().enumerate() {
        let label = rule.display_label(i);
        let mut region = Some(Region::default());
        for cond in &rule.conditions {
            let Some(decl) = table.declared(&cond.variable) else {
                issues.push(ValidationIssue::error(
                    IssueCode::UnknownVariable,
                    subject,
                    format!("rule {label}: variable `{}` is not a declared input", cond.variable),
                ));
                region = None;
                continue;
            };
            if let Some(problem) = condition_problem(cond, decl) {
                issues.push(ValidationIssue::error(
                    IssueCode::KindMismatch,
                    subject,
                    format!("rule {label}: {problem}"),
                ));
                region = None;
                continue;
            }
            if let Some(r) = region.as_mut() {
                r.constrain(cond);
            }
        }
        regions.push(region);
    }

    match table.hit_policy {
        HitPolicy::First => {
            for j in 0..regions.len() {
                let Some(later) = &regions[j] else { continue };
                let label = table.rules[j].display_label(j);
                if later.is_empty() {
                    issues.push(ValidationIssue::warning(
                        IssueCode::UnreachableRule,
                        subject,
                        format!("rule {label} can never match"),
                    ));
                    continue;
                }
                let shadow = (0..j).find(|&i| regions[i].as_ref().is_some_and(|earlier| later.subset_of(earlier)));
                if let Some(i) = shadow {
                    issues.push(ValidationIssue::warning(
                        IssueCode::UnreachableRule,
                        subject,
                        format!("rule {label} is shadowed by rule {}", table.rules[i].display_label(i)),
                    ));
                }
            }
        }
        HitPolicy::Unique => {
            if regions.iter().any(Option::is_none) {
                issues.push(ValidationIssue::warning(
                    IssueCode::UniquenessUnverifiable,
                    subject,
                    "malformed conditions prevent checking that rules are disjoint",
                ));
            } else {
                let regions: Vec<&Region> = regions.iter().flatten().collect();
                for i in 0..regions.len() {
                    for j in i + 1..regions.len() {
                        if regions[i].overlaps(regions[j]) {
                            issues.push(ValidationIssue::warning(
                                IssueCode::OverlappingRules,
                                subject,
                                format!(
                                    "rules {} and {} can match the same context",
                                    table.rules[i].display_label(i),
                                    table.rules[j].display_label(j)
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
    issues
}

fn condition_problem(cond: &Condition, decl: &InputDecl) -> Option<String> {
    if cond.literal.kind() != decl.kind {
        return Some(format!(
            "`{}` compares a {} literal against a {} input",
            cond.variable,
            cond.literal.kind(),
            decl.kind
        ));
    }
    if decl.kind == ValueKind::Number && cond.literal.unit() != decl.unit.as_deref() {
        return Some(format!(
            "`{}` literal unit {} differs from declared unit {}",
            cond.variable,
            cond.literal.unit().unwrap_or("none"),
            decl.unit.as_deref().unwrap_or("none")
        ));
    }
    if decl.kind != ValueKind::Number && !cond.comparator.is_equality() {
        return Some(format!("`{}` uses `{}` on a {} input", cond.variable, cond.comparator, decl.kind));
    }
    None
}

// ---------------------------------------------------------------------------
// Region analysis: the set of contexts a rule's conjunction accepts, per
// variable. Numeric variables range over the reals.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bound {
    value: f64,
    closed: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct NumSet {
    lo: Bound,
    hi: Bound,
    excluded: Vec<f64>,
}

impl NumSet {
    fn full() -> Self {
        NumSet {
            lo: Bound { value: f64::NEG_INFINITY, closed: false },
            hi: Bound { value: f64::INFINITY, closed: false },
            excluded: Vec::new(),
        }
    }

    fn raise_lo(&mut self, b: Bound) {
        if b.value > self.lo.value {
            self.lo = b;
        } else if b.value == self.lo.value {
            self.lo.closed &= b.closed;
        }
    }

    fn lower_hi(&mut self, b: Bound) {
        if b.value < self.hi.value {
            self.hi = b;
        } else if b.value == self.hi.value {
            self.hi.closed &= b.closed;
        }
    }

    fn constrain(&mut self, cmp: Comparator, x: f64) {
        match cmp {
            Comparator::Gt => self.raise_lo(Bound { value: x, closed: false }),
            Comparator::Ge => self.raise_lo(Bound { value: x, closed: true }),
            Comparator::Lt => self.lower_hi(Bound { value: x, closed: false }),
            Comparator::Le => self.lower_hi(Bound { value: x, closed: true }),
            Comparator::Eq => {
                self.raise_lo(Bound { value: x, closed: true });
                self.lower_hi(Bound { value: x, closed: true });
            }
            Comparator::Ne => self.excluded.push(x),
        }
    }

    fn intersect(&self, other: &NumSet) -> NumSet {
        let mut out = self.clone();
        out.raise_lo(other.lo);
        out.lower_hi(other.hi);
        out.excluded.extend_from_slice(&other.excluded);
        out
    }

    fn lo_effective_closed(&self) -> bool {
        self.lo.closed && !self.excluded.contains(&self.lo.value)
    }

    fn hi_effective_closed(&self) -> bool {
        self.hi.closed && !self.excluded.contains(&self.hi.value)
    }

    fn contains(&self, x: f64) -> bool {
        let above = x > self.lo.value || (x == self.lo.value && self.lo.closed);
        let below = x < self.hi.value || (x == self.hi.value && self.hi.closed);
        above && below && !self.excluded.contains(&x)
    }

    fn is_empty(&self) -> bool {
        if self.lo.value > self.hi.value {
            return true;
        }
        if self.lo.value == self.hi.value {
            return !(self.lo_effective_closed() && self.hi_effective_closed());
        }
        // A nondegenerate interval minus finitely many points is never empty.
        false
    }

    fn subset_of(&self, other: &NumSet) -> bool {
        if self.is_empty() {
            return true;
        }
        if self.lo.value == self.hi.value {
            return other.contains(self.lo.value);
        }
        let lo_ok = self.lo.value > other.lo.value
            || (self.lo.value == other.lo.value && (other.lo.closed || !self.lo_effective_closed()));
        let hi_ok = self.hi.value < other.hi.value
            || (self.hi.value == other.hi.value && (other.hi.closed || !self.hi_effective_closed()));
        lo_ok && hi_ok && other.excluded.iter().all(|&p| !self.contains(p))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Symbol {
    Boolean(bool),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
struct SymSet {
    boolean: bool,
    eq: Option<Symbol>,
    neq: Vec<Symbol>,
    contradiction: bool,
}

impl SymSet {
    fn constrain(&mut self, cmp: Comparator, x: Symbol) {
        if let Symbol::Boolean(_) = x {
            self.boolean = true;
        }
        match cmp {
            Comparator::Eq => match &self.eq {
                Some(current) if *current != x => self.contradiction = true,
                _ => self.eq = Some(x),
            },
            _ => self.neq.push(x),
        }
    }

    fn intersect(&self, other: &SymSet) -> SymSet {
        let mut out = self.clone();
        out.boolean |= other.boolean;
        out.contradiction |= other.contradiction;
        if let Some(x) = &other.eq {
            out.constrain(Comparator::Eq, x.clone());
        }
        out.neq.extend(other.neq.iter().cloned());
        out
    }

    fn contains(&self, x: &Symbol) -> bool {
        !self.contradiction && self.eq.as_ref().is_none_or(|e| e == x) && !self.neq.contains(x)
    }

    fn is_empty(&self) -> bool {
        if self.contradiction {
            return true;
        }
        match &self.eq {
            Some(x) => self.neq.contains(x),
            None => {
                self.boolean
                    && self.neq.contains(&Symbol::Boolean(true))
                    && self.neq.contains(&Symbol::Boolean(false))
            }
        }
    }

    fn subset_of(&self, other: &SymSet) -> bool {
        if self.is_empty() {
            return true;
        }
        if let Some(y) = &other.eq {
            let pinned = match &self.eq {
                Some(x) => Some(x.clone()),
                // `!= b` over booleans pins the other value.
                None if self.boolean => match (
                    self.neq.contains(&Symbol::Boolean(true)),
                    self.neq.contains(&Symbol::Boolean(false)),
                ) {
                    (true, false) => Some(Symbol::Boolean(false)),
                    (false, true) => Some(Symbol::Boolean(true)),
                    _ => None,
                },
                None => None,
            };
            if pinned.as_ref() != Some(y) {
                return false;
            }
        }
        other.neq.iter().all(|p| !self.contains(p))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum VarSet {
    Num(NumSet),
    Sym(SymSet),
}

impl VarSet {
    fn is_empty(&self) -> bool {
        match self {
            VarSet::Num(n) => n.is_empty(),
            VarSet::Sym(s) => s.is_empty(),
        }
    }

    fn intersect(&self, other: &VarSet) -> VarSet {
        match (self, other) {
            (VarSet::Num(a), VarSet::Num(b)) => VarSet::Num(a.intersect(b)),
            (VarSet::Sym(a), VarSet::Sym(b)) => VarSet::Sym(a.intersect(b)),
            // Only reachable with kind-inconsistent conditions, which are
            // filtered out before region analysis.
            (a, _) => a.clone(),
        }
    }

    fn subset_of(&self, other: &VarSet) -> bool {
        match (self, other) {
            (VarSet::Num(a), VarSet::Num(b)) => a.subset_of(b),
            (VarSet::Sym(a), VarSet::Sym(b)) => a.subset_of(b),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Region {
    vars: BTreeMap<String, VarSet>,
}

impl Region {
    fn constrain(&mut self, cond: &Condition) {
        let entry = self.vars.entry(cond.variable.to_string()).or_insert_with(|| match cond.literal {
            Value::Number { .. } => VarSet::Num(NumSet::full()),
            _ => VarSet::Sym(SymSet::default()),
        });
        match (entry, &cond.literal) {
            (VarSet::Num(n), Value::Number { value, .. }) => n.constrain(cond.comparator, *value),
            (VarSet::Sym(s), Value::Boolean(b)) => s.constrain(cond.comparator, Symbol::Boolean(*b)),
            (VarSet::Sym(s), Value::Text(t)) => s.constrain(cond.comparator, Symbol::Text(t.clone())),
            _ => {}
        }
    }

    fn is_empty(&self) -> bool {
        self.vars.values().any(VarSet::is_empty)
    }

    /// Every context accepted by `self` is accepted by `other`.
    fn subset_of(&self, other: &Region) -> bool {
        if self.is_empty() {
            return true;
        }
        other.vars.iter().all(|(name, theirs)| match self.vars.get(name) {
            Some(ours) => ours.subset_of(theirs),
            // Unconstrained here, constrained there: `other` always excludes
            // something since every constraint comes from a finite literal.
            None => false,
        })
    }

    fn overlaps(&self, other: &Region) -> bool {
        let names: BTreeSet<&String> = self.vars.keys().chain(other.vars.keys()).collect();
        names.into_iter().all(|name| match (self.vars.get(name), other.vars.get(name)) {
            (Some(a), Some(b)) => !a.intersect(b).is_empty(),
            (Some(a), None) | (None, Some(a)) => !a.is_empty(),
            (None, None) => true,
        })
    }
}
