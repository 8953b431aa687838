//! Context inputs for rule-driven runs: timeline files and inline
//! `--context key=value[unit]` assignments.

use std::collections::BTreeMap;

use sadp_core::{ContextSnapshot, ContextTimeline, Value};
use serde::{Deserialize, Serialize};

use crate::error::{ParseError, ParseErrorCode, Location};
use crate::workflow::{read_json, ParseOptions};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimelineEntryDto {
    pub request: String,
    #[serde(default)]
    pub context: BTreeMap<String, ContextValueDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextValueDto {
    pub value: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

/// Reads `[{request, context: {var: {value, unit?}}}]`.
pub fn parse_timeline_json(text: &str) -> Result<ContextTimeline, ParseError> {
    let mut ignored = Vec::new();
    let entries: Vec<TimelineEntryDto> = read_json(text, ParseOptions::default(), &mut ignored, "timeline")?;
    let mut out = Vec::with_capacity(entries.len());
    for (i, entry) in entries.into_iter().enumerate() {
        let mut ctx = ContextSnapshot::new();
        for (name, v) in entry.context {
            let path = format!("[{i}].context.{name}");
            let value = match (v.value, v.unit) {
                (serde_json::Value::Number(n), unit) => Value::Number {
                    value: n.as_f64().ok_or_else(|| ParseError::schema(&path, "number out of range"))?,
                    unit,
                },
                (serde_json::Value::Bool(b), None) => Value::Boolean(b),
                (serde_json::Value::String(s), None) => Value::Text(s),
                (serde_json::Value::Bool(_) | serde_json::Value::String(_), Some(_)) => {
                    return Err(ParseError::schema(path, "only numbers carry a unit"))
                }
                _ => return Err(ParseError::schema(path, "value must be a number, boolean or string")),
            };
            ctx.insert(name, value).map_err(|e| ParseError::schema(&path, e.to_string()))?;
        }
        out.push((entry.request, ctx));
    }
    ContextTimeline::new(out).map_err(|e| ParseError::new(ParseErrorCode::SemanticError, Location::path("request"), e.to_string()))
}

/// Parses the value half of `key=value[unit]`: `6kW`, `1200 ms`, `true`,
/// `eco`. A leading number makes it numeric; the rest, trimmed, is the unit.
pub fn parse_context_value(text: &str) -> Value {
    let text = text.trim();
    match text {
        "true" => return Value::Boolean(true),
        "false" => return Value::Boolean(false),
        _ => {}
    }
    let numeric_start = text.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '.'));
    if numeric_start {
        let split = (1..=text.len())
            .rev()
            .filter(|&i| text.is_char_boundary(i))
            .find(|&i| text[..i].parse::<f64>().is_ok());
        if let Some(i) = split {
            let value = text[..i].parse::<f64>().expect("checked above");
            let unit = text[i..].trim();
            return Value::Number { value, unit: (!unit.is_empty()).then(|| unit.to_string()) };
        }
    }
    Value::Text(text.to_string())
}

/// Builds a snapshot from `key=value[unit]` assignments.
pub fn parse_context_args<S: AsRef<str>>(args: &[S]) -> Result<ContextSnapshot, String> {
    let mut ctx = ContextSnapshot::new();
    for arg in args {
        let arg = arg.as_ref();
        let (key, value) = arg.split_once('=').ok_or_else(|| format!("--context `{arg}` is not key=value"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("--context `{arg}` has an empty key"));
        }
        ctx.insert(key, parse_context_value(value)).map_err(|e| format!("--context `{arg}`: {e}"))?;
    }
    Ok(ctx)
}
