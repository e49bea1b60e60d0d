//! Generic HTTP chat backend.
//!
//! Request and response field mapping lives in a backend-profile document so
//! that new providers need configuration, not code. The profile names the
//! endpoint, the model identifier, the environment variable holding the
//! credential, role-name mapping, and dot-paths into the response body for
//! the assistant text and token usage.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{BackendError, ChatBackend, ChatRequest, ChatResponse, ChatRole, UsageCounters};

/// Wire mapping for one provider.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HttpBackendProfile {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the credential; the value
    /// itself never appears in configuration.
    #[serde(default)]
    pub credential_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    #[serde(default)]
    pub supports_media: bool,
    /// Role-name mapping; tool results default to the "user" role.
    #[serde(default)]
    pub role_names: BTreeMap<String, String>,
    /// Whether to send the tool schema documents as a top-level request field.
    #[serde(default)]
    pub include_tools_field: bool,
    #[serde(default = "default_text_path")]
    pub text_path: String,
    #[serde(default = "default_input_tokens_path")]
    pub input_tokens_path: String,
    #[serde(default = "default_output_tokens_path")]
    pub output_tokens_path: String,
    /// Provider-specific request fields, passed through opaquely.
    #[serde(default)]
    pub extra_body: serde_json::Map<String, serde_json::Value>,
}

fn default_timeout() -> u64 {
    120
}

fn default_text_path() -> String {
    "choices.0.message.content".into()
}

fn default_input_tokens_path() -> String {
    "usage.prompt_tokens".into()
}

fn default_output_tokens_path() -> String {
    "usage.completion_tokens".into()
}

impl HttpBackendProfile {
    fn role_name(&self, role: ChatRole) -> String {
        let key = match role {
            ChatRole::System => "system",
            ChatRole::User => "user",
            ChatRole::Assistant => "assistant",
            ChatRole::Tool => "tool",
        };
        if let Some(mapped) = self.role_names.get(key) {
            return mapped.clone();
        }
        // Tool results travel as user messages unless the profile says
        // otherwise; most chat APIs reject bare tool-role messages.
        if role == ChatRole::Tool {
            return "user".into();
        }
        key.to_string()
    }
}

/// Follows a dot-path through a JSON value; numeric segments index arrays.
fn lookup_path<'a>(value: &'a serde_json::Value, path: &str) -> Option<&'a serde_json::Value> {
    let mut current = value;
    for segment in path.split('.') {
        current = match segment.parse::<usize>() {
            Ok(index) => current.as_array()?.get(index)?,
            Err(_) => current.as_object()?.get(segment)?,
        };
    }
    Some(current)
}

pub struct HttpBackend {
    profile: HttpBackendProfile,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(profile: HttpBackendProfile) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(profile.timeout_s))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend { profile, client })
    }

    pub fn profile(&self) -> &HttpBackendProfile {
        &self.profile
    }

    fn build_body(&self, request: &ChatRequest) -> serde_json::Value {
        let messages: Vec<serde_json::Value> = request
            .messages
            .iter()
            .map(|m| {
                let mut obj = serde_json::Map::new();
                obj.insert("role".into(), self.profile.role_name(m.role).into());
                obj.insert("content".into(), m.content.clone().into());
                if self.profile.supports_media && !m.media.is_empty() {
                    obj.insert(
                        "media".into(),
                        serde_json::to_value(&m.media).unwrap_or(serde_json::Value::Null),
                    );
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut body = serde_json::Map::new();
        body.insert("model".into(), self.profile.model.clone().into());
        body.insert("messages".into(), serde_json::Value::Array(messages));
        if self.profile.include_tools_field && !request.tools.is_empty() {
            body.insert(
                "tools".into(),
                serde_json::Value::Array(request.tools.clone()),
            );
        }
        for (k, v) in &self.profile.extra_body {
            body.insert(k.clone(), v.clone());
        }
        serde_json::Value::Object(body)
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let mut builder = self
            .client
            .post(&self.profile.base_url)
            .json(&self.build_body(request));
        if let Some(var) = &self.profile.credential_env {
            if let Ok(secret) = std::env::var(var) {
                builder = builder.bearer_auth(secret);
            }
        }
        let response = builder
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status();
        let body: serde_json::Value = response
            .json()
            .map_err(|e| BackendError::Protocol(format!("response is not JSON: {e}")))?;
        if !status.is_success() {
            return Err(BackendError::Transport(format!(
                "backend returned {status}: {body}"
            )));
        }
        let text = lookup_path(&body, &self.profile.text_path)
            .and_then(|v| v.as_str())
            .ok_or_else(|| {
                BackendError::Protocol(format!(
                    "no assistant text at '{}' in backend reply",
                    self.profile.text_path
                ))
            })?
            .to_string();
        let usage = UsageCounters {
            input_tokens: lookup_path(&body, &self.profile.input_tokens_path)
                .and_then(|v| v.as_u64())
                .unwrap_or(0),
            output_tokens: lookup_path(&body, &self.profile.output_tokens_path)
                .and_then(|v| v.as_u64())
                .unwrap_or(0),
        };
        Ok(ChatResponse { text, usage })
    }

    fn name(&self) -> &str {
        &self.profile.model
    }
}
