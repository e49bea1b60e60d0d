//! Agent adapter: presents observations to the agent under test over a
//! generic chat backend, and provides scripted agents for deterministic runs.

mod backend;
mod http;
mod oracle;

pub use backend::{BackendError, ChatBackend, ChatRequest, ChatResponse, CountingBackend, ScriptedBackend};
pub use http::{HttpBackend, HttpBackendProfile};
pub use oracle::{oracle_agent, oracle_agent_with_extra};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::task::{MediaKind, MediaRef};

/// Chat roles in an agent-side history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatRole {
    System,
    User,
    Assistant,
    Tool,
}

/// One message of the agent-side history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
    /// Media attachments, forwarded by reference and never decoded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub media: Vec<MediaRef>,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::System,
            content: content.into(),
            media: Vec::new(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::User,
            content: content.into(),
            media: Vec::new(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::Assistant,
            content: content.into(),
            media: Vec::new(),
        }
    }

    pub fn tool(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::Tool,
            content: content.into(),
            media: Vec::new(),
        }
    }
}

/// Token accounting for one episode; counters only ever grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageCounters {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl UsageCounters {
    pub fn add(&mut self, other: UsageCounters) {
        self.input_tokens += other.input_tokens;
        self.output_tokens += other.output_tokens;
    }
}

/// Errors surfaced by [`AgentAdapter::send`].
#[derive(Debug, Error)]
pub enum AgentError {
    #[error("history must not be empty")]
    EmptyHistory,
    #[error("first history message must be the agent system prompt")]
    MissingSystemPrompt,
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
}

/// One completed send: the assistant text, the usage delta (zeros when the
/// backend does not report usage), and how many old tool-result payloads
/// were elided to fit the context budget.
#[derive(Debug, Clone)]
pub struct SendOutcome {
    pub text: String,
    pub usage: UsageCounters,
    pub truncated_tool_results: usize,
}

const ELIDED_PLACEHOLDER: &str = "[tool results elided]";

/// Connects the agent under test. Stateless per call; retries transport
/// failures with exponential backoff.
pub struct AgentAdapter {
    backend: Arc<dyn ChatBackend>,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub supports_media: bool,
    /// When set, histories above this many content characters are reduced
    /// by eliding the oldest tool-result payloads first. Off by default:
    /// the backend receives exactly the orchestrator's record.
    pub context_budget_chars: Option<usize>,
}

impl AgentAdapter {
    pub fn new(backend: Arc<dyn ChatBackend>) -> Self {
        AgentAdapter {
            backend,
            max_retries: 3,
            backoff_ms: 200,
            supports_media: false,
            context_budget_chars: None,
        }
    }

    pub fn with_media_support(mut self, supports: bool) -> Self {
        self.supports_media = supports;
        self
    }

    /// Model identifier used in reports.
    pub fn model_name(&self) -> String {
        self.backend.name().to_string()
    }

    fn apply_context_budget(&self, messages: &mut [ChatMessage]) -> usize {
        let Some(budget) = self.context_budget_chars else {
            return 0;
        };
        let mut total: usize = messages.iter().map(|m| m.content.len()).sum();
        let mut elided = 0;
        for message in messages.iter_mut() {
            if total <= budget {
                break;
            }
            if message.role == ChatRole::Tool && message.content != ELIDED_PLACEHOLDER {
                total -= message.content.len();
                total += ELIDED_PLACEHOLDER.len();
                message.content = ELIDED_PLACEHOLDER.to_string();
                elided += 1;
            }
        }
        elided
    }

    /// Sends the history and tool schema documents to the backend.
    pub fn send(
        &self,
        history: &[ChatMessage],
        tools: &[serde_json::Value],
    ) -> Result<SendOutcome, AgentError> {
        if history.is_empty() {
            return Err(AgentError::EmptyHistory);
        }
        if history[0].role != ChatRole::System {
            return Err(AgentError::MissingSystemPrompt);
        }
        let mut messages = history.to_vec();
        let truncated = self.apply_context_budget(&mut messages);
        let request = ChatRequest {
            messages,
            tools: tools.to_vec(),
        };
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.backend.complete(&request) {
                Ok(response) => {
                    return Ok(SendOutcome {
                        text: response.text,
                        usage: response.usage,
                        truncated_tool_results: truncated,
                    })
                }
                Err(BackendError::Transport(message)) => {
                    if attempts > self.max_retries {
                        return Err(AgentError::Transport { attempts, message });
                    }
                    let delay = self.backoff_ms.saturating_mul(1 << (attempts - 1));
                    std::thread::sleep(std::time::Duration::from_millis(delay));
                }
                Err(BackendError::Protocol(message)) => {
                    return Err(AgentError::Protocol(message))
                }
            }
        }
    }
}
