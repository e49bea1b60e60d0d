//! Chat backend abstraction and scripted implementations.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use thiserror::Error;

use super::{ChatMessage, UsageCounters};

/// A chat completion request: the full history plus tool schema documents.
#[derive(Debug, Clone)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub tools: Vec<serde_json::Value>,
}

/// A chat completion: assistant text plus reported usage (zeros if unknown).
#[derive(Debug, Clone)]
pub struct ChatResponse {
    pub text: String,
    pub usage: UsageCounters,
}

#[derive(Debug, Error)]
pub enum BackendError {
    /// Network-level failure; retried with backoff.
    #[error("transport: {0}")]
    Transport(String),
    /// The backend answered but the reply could not be interpreted.
    #[error("protocol: {0}")]
    Protocol(String),
}

/// Anything that can complete a chat. Implementations must support
/// concurrent independent sessions.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError>;
    /// Model identifier used in reports.
    fn name(&self) -> &str;
}

/// Replays a fixed playbook of responses in order; after exhaustion the last
/// entry repeats. Entirely deterministic.
pub struct ScriptedBackend {
    name: String,
    playbook: Vec<String>,
    cursor: AtomicUsize,
}

impl ScriptedBackend {
    pub fn new(name: &str, playbook: Vec<String>) -> Self {
        ScriptedBackend {
            name: name.to_string(),
            playbook,
            cursor: AtomicUsize::new(0),
        }
    }

    /// Number of completions served so far.
    pub fn calls(&self) -> usize {
        self.cursor.load(Ordering::SeqCst)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, _request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        if self.playbook.is_empty() {
            return Err(BackendError::Protocol("scripted playbook is empty".into()));
        }
        let index = self.cursor.fetch_add(1, Ordering::SeqCst);
        let text = self
            .playbook
            .get(index)
            .or_else(|| self.playbook.last())
            .cloned()
            .unwrap_or_default();
        Ok(ChatResponse {
            text,
            usage: UsageCounters::default(),
        })
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// Wraps a backend and counts invocations; used to assert the pipeline's
/// bounded call contracts.
pub struct CountingBackend {
    inner: Arc<dyn ChatBackend>,
    count: AtomicUsize,
}

impl CountingBackend {
    pub fn new(inner: Arc<dyn ChatBackend>) -> Self {
        CountingBackend {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.count.load(Ordering::SeqCst)
    }
}

impl ChatBackend for CountingBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        self.count.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(request)
    }

    fn name(&self) -> &str {
        self.inner.name()
    }
}
