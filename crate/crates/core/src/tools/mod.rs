//! Tool engine: scenario toolsets and their execution semantics.
//!
//! Tools come in three kinds. Read tools resolve name parameters through the
//! fuzzy ladder and never mutate the database. Write tools mutate it
//! atomically and store the caller-supplied attributes. Calculation tools
//! resolve names at the exact tier only and report unresolved names through
//! a partial_success result.

mod builtin;
mod calc;
mod exec;
mod fuzzy;
mod shape;

pub use builtin::{builtin_catalog, builtin_schema, retail_toolset};
pub use calc::round2;
pub use exec::execute;
pub use fuzzy::{fuzzy_match, fuzzy_match_with_threshold, MatchSet, MatchTier, TOKEN_OVERLAP_THRESHOLD};
pub use shape::{validate_call_shape, ShapeError};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::normalize_name;

/// Tool families with distinct execution semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ToolKind {
    Read,
    Write,
    Calc,
}

/// Parameter value families used for light validation and schema emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamType {
    String,
    Number,
    Integer,
    Array,
    Object,
    Boolean,
}

/// One declared parameter of a tool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolParam {
    pub name: String,
    pub param_type: ParamType,
    pub required: bool,
    #[serde(default)]
    pub description: String,
    /// Value must be strictly greater than this bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusive_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    /// Array parameter whose element order carries no meaning; ground-truth
    /// matching compares such lists as multisets.
    #[serde(default)]
    pub unordered: bool,
}

impl ToolParam {
    pub fn string(name: &str, required: bool, description: &str) -> Self {
        ToolParam {
            name: name.into(),
            param_type: ParamType::String,
            required,
            description: description.into(),
            exclusive_min: None,
            min: None,
            max: None,
            unordered: false,
        }
    }

    pub fn number(name: &str, required: bool, description: &str) -> Self {
        ToolParam {
            param_type: ParamType::Number,
            ..ToolParam::string(name, required, description)
        }
    }

    pub fn array(name: &str, required: bool, description: &str, unordered: bool) -> Self {
        ToolParam {
            param_type: ParamType::Array,
            unordered,
            ..ToolParam::string(name, required, description)
        }
    }
}

/// Declared surface of one tool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolSchema {
    pub tool_name: String,
    pub description: String,
    pub parameters: Vec<ToolParam>,
    pub kind: ToolKind,
    /// Verbatim schema document when the toolset was loaded from a file;
    /// used unchanged in agent prompts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_doc: Option<serde_json::Value>,
}

impl ToolSchema {
    /// Function-schema document in the shape tool files use
    /// (`{"type": "function", "function": {...}}`).
    pub fn schema_document(&self) -> serde_json::Value {
        if let Some(raw) = &self.raw_doc {
            return raw.clone();
        }
        let mut properties = serde_json::Map::new();
        let mut required = Vec::new();
        for param in &self.parameters {
            let mut prop = serde_json::Map::new();
            prop.insert(
                "type".into(),
                serde_json::Value::String(
                    match param.param_type {
                        ParamType::String => "string",
                        ParamType::Number => "number",
                        ParamType::Integer => "integer",
                        ParamType::Array => "array",
                        ParamType::Object => "object",
                        ParamType::Boolean => "boolean",
                    }
                    .into(),
                ),
            );
            if !param.description.is_empty() {
                prop.insert("description".into(), param.description.clone().into());
            }
            if let Some(m) = param.exclusive_min {
                prop.insert("exclusiveMinimum".into(), json_number(m));
            }
            if let Some(m) = param.min {
                prop.insert("minimum".into(), json_number(m));
            }
            if let Some(m) = param.max {
                prop.insert("maximum".into(), json_number(m));
            }
            properties.insert(param.name.clone(), serde_json::Value::Object(prop));
            if param.required {
                required.push(serde_json::Value::String(param.name.clone()));
            }
        }
        serde_json::json!({
            "type": "function",
            "function": {
                "tool_name": self.tool_name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "additionalProperties": false,
                    "properties": properties,
                    "required": required,
                }
            }
        })
    }
}

fn json_number(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

/// Errors raised while building or loading a tool registry.
#[derive(Debug, Error)]
pub enum ToolError {
    #[error("duplicate tool '{0}' in toolset")]
    DuplicateTool(String),
    #[error("toolset must not be empty")]
    EmptyToolset,
    #[error("tool '{0}' has no built-in executor")]
    UnknownBuiltin(String),
    #[error("toolset file error: {0}")]
    File(String),
    #[error("io error reading toolset: {0}")]
    Io(#[from] std::io::Error),
    #[error("toolset file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Immutable, shareable registry of the tools one scenario exposes.
#[derive(Debug, Clone)]
pub struct ToolRegistry {
    by_name: BTreeMap<String, ToolSchema>,
}

impl ToolRegistry {
    /// Builds a registry from schemas, rejecting duplicates (names compared
    /// case-insensitively after normalization).
    pub fn register_toolset(schemas: Vec<ToolSchema>) -> Result<ToolRegistry, ToolError> {
        if schemas.is_empty() {
            return Err(ToolError::EmptyToolset);
        }
        let mut by_name = BTreeMap::new();
        for schema in schemas {
            let key = normalize_name(&schema.tool_name);
            if by_name.insert(key, schema.clone()).is_some() {
                return Err(ToolError::DuplicateTool(schema.tool_name));
            }
        }
        Ok(ToolRegistry { by_name })
    }

    /// Case-insensitive lookup.
    pub fn resolve(&self, tool_name: &str) -> Option<&ToolSchema> {
        self.by_name.get(&normalize_name(tool_name))
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }

    pub fn kind_of(&self, tool_name: &str) -> Option<ToolKind> {
        self.resolve(tool_name).map(|s| s.kind)
    }

    /// True when the named array parameter is declared order-insensitive.
    pub fn is_unordered_param(&self, tool_name: &str, param: &str) -> bool {
        self.resolve(tool_name)
            .map(|s| {
                s.parameters
                    .iter()
                    .any(|p| p.name == param && p.unordered)
            })
            .unwrap_or(false)
    }

    pub fn schemas(&self) -> impl Iterator<Item = &ToolSchema> {
        self.by_name.values()
    }

    /// Schema documents for the agent prompt, in name order.
    pub fn schema_documents(&self) -> Vec<serde_json::Value> {
        self.by_name.values().map(|s| s.schema_document()).collect()
    }

    /// Loads a toolset file: a JSON array of function-schema documents.
    /// Every tool must name a built-in behavior so that calls are executable.
    pub fn load_toolset_file(path: impl AsRef<Path>) -> Result<ToolRegistry, ToolError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_toolset(&text)
    }

    /// Parses a toolset document from a JSON string.
    pub fn parse_toolset(text: &str) -> Result<ToolRegistry, ToolError> {
        let doc: serde_json::Value = serde_json::from_str(text)?;
        let entries = doc
            .as_array()
            .ok_or_else(|| ToolError::File("toolset file must be a JSON array".into()))?;
        let mut schemas = Vec::new();
        for entry in entries {
            let function = entry
                .get("function")
                .and_then(|f| f.as_object())
                .ok_or_else(|| {
                    ToolError::File("toolset entries must carry a 'function' object".into())
                })?;
            let name = function
                .get("tool_name")
                .and_then(|n| n.as_str())
                .ok_or_else(|| ToolError::File("tool entry is missing 'tool_name'".into()))?;
            let mut schema = builtin_schema(name)
                .ok_or_else(|| ToolError::UnknownBuiltin(name.to_string()))?;
            if let Some(desc) = function.get("description").and_then(|d| d.as_str()) {
                schema.description = desc.to_string();
            }
            schema.raw_doc = Some(entry.clone());
            schemas.push(schema);
        }
        Self::register_toolset(schemas)
    }
}

/// An action in the environment: a named operation plus a parameter map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub tool_name: String,
    pub parameters: serde_json::Map<String, serde_json::Value>,
}

impl ToolCall {
    pub fn new(tool_name: &str, parameters: serde_json::Value) -> Self {
        ToolCall {
            tool_name: tool_name.to_string(),
            parameters: parameters.as_object().cloned().unwrap_or_default(),
        }
    }

    pub fn str_param(&self, name: &str) -> Option<&str> {
        self.parameters.get(name).and_then(|v| v.as_str())
    }

    pub fn num_param(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).and_then(|v| v.as_f64())
    }
}

/// Execution outcome status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolStatus {
    Success,
    PartialSuccess,
    Error,
}

impl ToolStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ToolStatus::Success => "success",
            ToolStatus::PartialSuccess => "partial_success",
            ToolStatus::Error => "error",
        }
    }
}

/// Observation payload returned by one executed call.
///
/// `payload` is the complete wire document fed back to the agent; write and
/// calculation results embed their status and message in it, read results
/// are bare data documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolResult {
    pub status: ToolStatus,
    pub message: String,
    pub payload: serde_json::Value,
}

impl ToolResult {
    /// Read result: the payload is the document itself.
    pub fn read_ok(payload: serde_json::Value) -> Self {
        ToolResult {
            status: ToolStatus::Success,
            message: String::new(),
            payload,
        }
    }

    /// Write result carrying status and message, plus any extra fields.
    pub fn write_ok(message: &str, extra: serde_json::Value) -> Self {
        let mut payload = serde_json::Map::new();
        payload.insert("status".into(), "success".into());
        payload.insert("message".into(), message.into());
        if let serde_json::Value::Object(extra) = extra {
            for (k, v) in extra {
                payload.insert(k, v);
            }
        }
        ToolResult {
            status: ToolStatus::Success,
            message: message.to_string(),
            payload: serde_json::Value::Object(payload),
        }
    }

    /// Calculation result; `fields` come first so the payload mirrors the
    /// calculator documents (totals, details, then status and message).
    pub fn calc(status: ToolStatus, message: &str, fields: serde_json::Value) -> Self {
        let mut payload = serde_json::Map::new();
        if let serde_json::Value::Object(fields) = fields {
            for (k, v) in fields {
                payload.insert(k, v);
            }
        }
        payload.insert("status".into(), status.as_str().into());
        payload.insert("message".into(), message.into());
        ToolResult {
            status,
            message: message.to_string(),
            payload: serde_json::Value::Object(payload),
        }
    }

    /// Error result; never accompanies a mutation.
    pub fn error(message: &str) -> Self {
        ToolResult {
            status: ToolStatus::Error,
            message: message.to_string(),
            payload: serde_json::json!({
                "status": "error",
                "message": message,
            }),
        }
    }

    /// Serialized form fed back to the agent.
    pub fn wire_text(&self) -> String {
        self.payload.to_string()
    }
}
