//! Episode orchestration: turn alternation, tool batches, budgets, logs.

mod budget;
mod log;
mod orchestrator;
mod parse;

pub use budget::{enforce_budgets, BudgetCounters, BudgetDecision};
pub use log::{DialogueEntry, ToolCallsEntry, ToolResultEntry, TrajectoryLog};
pub use orchestrator::{run_episode, AGENT_GREETING};
pub use parse::{parse_agent_message, AgentMessage};

use serde::{Deserialize, Serialize};

use crate::agent::UsageCounters;
use crate::scenario::StateDigest;
use crate::tools::{ToolCall, ToolResult};
use crate::user::{CriteriaScores, InteractionMode};

/// Budgets and mode for one episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub mode: InteractionMode,
    /// Outer-loop bound on user turns.
    pub max_user_turns: u32,
    /// Cumulative cap on executed tool calls.
    pub max_tool_calls: u32,
    /// Safety bound on agent responses within one turn.
    pub max_inner_iterations: u32,
    /// Seed for harness-side randomness (hard-mode noise).
    pub noise_seed: u64,
    /// Dynamic-hard termination after this many consecutive complaints;
    /// disabled by default.
    pub terminate_after_complaints: Option<u32>,
}

impl EpisodeConfig {
    pub fn new(mode: InteractionMode) -> Self {
        EpisodeConfig {
            mode,
            max_user_turns: 10,
            max_tool_calls: 200,
            max_inner_iterations: 25,
            noise_seed: 0,
            terminate_after_complaints: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_user_turns == 0 || self.max_tool_calls == 0 || self.max_inner_iterations == 0 {
            return Err("episode bounds must be positive".into());
        }
        Ok(())
    }
}

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HaltReason {
    /// The user signalled completion (or static mode finished its round).
    UserStop,
    TurnLimit,
    ToolLimit,
    AgentError,
    /// Dynamic-hard termination policy fired.
    UserTerminated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnRole {
    User,
    Agent,
    ToolBatch,
}

/// Evaluation info attached to user turns. Serializes in the log shape:
/// a bare `scores` object with the four binary fields, the suggestion
/// alongside it, and the correction context.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "WireEvaluation", from = "WireEvaluation")]
pub struct TurnEvaluation {
    pub scores: CriteriaScores,
    pub original_response: Option<String>,
    pub correction_applied: bool,
}

#[derive(Serialize, Deserialize)]
struct WireScores {
    role_consistency: u8,
    instruction_following: u8,
    resilience: u8,
    contextual_robustness: u8,
}

#[derive(Serialize, Deserialize)]
struct WireEvaluation {
    scores: WireScores,
    suggestion: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    original_response: Option<String>,
    correction_applied: bool,
}

impl From<TurnEvaluation> for WireEvaluation {
    fn from(eval: TurnEvaluation) -> Self {
        WireEvaluation {
            scores: WireScores {
                role_consistency: eval.scores.role_consistency,
                instruction_following: eval.scores.instruction_following,
                resilience: eval.scores.resilience,
                contextual_robustness: eval.scores.contextual_robustness,
            },
            suggestion: eval.scores.suggestion,
            original_response: eval.original_response,
            correction_applied: eval.correction_applied,
        }
    }
}

impl From<WireEvaluation> for TurnEvaluation {
    fn from(wire: WireEvaluation) -> Self {
        TurnEvaluation {
            scores: CriteriaScores {
                role_consistency: wire.scores.role_consistency,
                instruction_following: wire.scores.instruction_following,
                resilience: wire.scores.resilience,
                contextual_robustness: wire.scores.contextual_robustness,
                suggestion: wire.suggestion,
            },
            original_response: wire.original_response,
            correction_applied: wire.correction_applied,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TurnContent {
    Text(String),
    Batch(Vec<(ToolCall, ToolResult)>),
}

/// One entry of the episode record. Tool-batch turns always immediately
/// follow the agent turn whose message parsed as calls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Turn {
    pub role: TurnRole,
    /// Round counter (one round per user turn).
    pub index: u32,
    pub content: TurnContent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_usage: Option<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<TurnEvaluation>,
}

/// Full record of one episode.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub task_id: String,
    pub mode: InteractionMode,
    pub turns: Vec<Turn>,
    pub final_digest: StateDigest,
    pub halted_reason: HaltReason,
    /// Executed calls in execution order.
    pub tool_calls_flat: Vec<ToolCall>,
    /// Structural violations observed while parsing agent messages.
    pub format_violations: Vec<String>,
    /// Backend or pipeline errors recorded before halting.
    pub error_notes: Vec<String>,
    pub usage: UsageCounters,
    pub user_turns: u32,
    /// Rounds with a natural-language agent reply.
    pub rounds_count: u32,
    /// Simulated-user advisory warnings (summary length, missing user id).
    pub user_warnings: Vec<String>,
    /// Media was replaced by the action-description text for a backend
    /// without media support.
    pub media_degraded: bool,
    /// Notable adapter events (context truncation).
    pub adapter_events: Vec<String>,
}

impl Trajectory {
    /// Text of the last natural-language agent reply, if any. Agent turns
    /// directly followed by a tool batch hold raw call JSON and are skipped.
    pub fn final_agent_reply(&self) -> Option<&str> {
        for (i, turn) in self.turns.iter().enumerate().rev() {
            if turn.role != TurnRole::Agent {
                continue;
            }
            let followed_by_batch = self
                .turns
                .get(i + 1)
                .is_some_and(|t| t.role == TurnRole::ToolBatch);
            if followed_by_batch {
                continue;
            }
            if let TurnContent::Text(text) = &turn.content {
                return Some(text.as_str());
            }
        }
        None
    }
}
