//! Structural validation of raw tool-call values.

use serde::Serialize;
use thiserror::Error;

use super::ToolCall;

/// The three structural failure modes a raw call value can exhibit.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum ShapeError {
    /// Nothing that could be a call (null or absent value).
    #[error("no tool call emitted")]
    NoCall,
    /// The value is not a record at all (string, number, array, ...).
    #[error("tool call is not a record: {0}")]
    NotARecord(String),
    /// The record lacks a string `tool_name` or a map `parameters`.
    #[error("tool call is missing required fields: {0}")]
    MissingFields(String),
}

/// Accepts only records with a non-empty string `tool_name` and a map
/// `parameters` (possibly empty). Anything else reports which structural
/// condition fired.
pub fn validate_call_shape(raw: &serde_json::Value) -> Result<ToolCall, ShapeError> {
    if raw.is_null() {
        return Err(ShapeError::NoCall);
    }
    let obj = match raw.as_object() {
        Some(obj) => obj,
        None => {
            return Err(ShapeError::NotARecord(truncate(&raw.to_string())));
        }
    };
    let tool_name = match obj.get("tool_name") {
        Some(serde_json::Value::String(name)) if !name.trim().is_empty() => name.clone(),
        Some(_) => {
            return Err(ShapeError::MissingFields(
                "'tool_name' must be a non-empty string".into(),
            ))
        }
        None => {
            return Err(ShapeError::MissingFields(
                "missing required field 'tool_name'".into(),
            ))
        }
    };
    let parameters = match obj.get("parameters") {
        Some(serde_json::Value::Object(map)) => map.clone(),
        Some(_) => {
            return Err(ShapeError::MissingFields(
                "'parameters' must be a map".into(),
            ))
        }
        None => {
            return Err(ShapeError::MissingFields(format!(
                "call to '{tool_name}' lacks a 'parameters' field"
            )))
        }
    };
    Ok(ToolCall {
        tool_name,
        parameters,
    })
}

fn truncate(s: &str) -> String {
    if s.chars().count() > 80 {
        let cut: String = s.chars().take(77).collect();
        format!("{cut}...")
    } else {
        s.to_string()
    }
}
