//! Trajectory log files.
//!
//! One JSON document per episode carrying the dialogue, the tool batches
//! with their results, and the round/token/call counters, plus the harness
//! fields (mode, halting reason, final digest, seed).

use serde::{Deserialize, Serialize};

use crate::task::TaskSpec;
use crate::tools::ToolCall;
use crate::user::InteractionMode;

use super::{HaltReason, Trajectory, Turn, TurnContent, TurnEvaluation, TurnRole};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DialogueEntry {
    pub role: String,
    pub turn: u32,
    pub content: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<TurnEvaluation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolResultEntry {
    pub role: String,
    pub tool_name: String,
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub content: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolCallsEntry {
    pub turn: u32,
    pub calls: Vec<ToolCall>,
    pub results: Vec<ToolResultEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub task_id: String,
    pub scenario_id: String,
    pub mode: InteractionMode,
    pub model: String,
    pub seed: u64,
    pub instruction: String,
    pub image_description: String,
    pub dialogue: Vec<DialogueEntry>,
    pub tool_calls: Vec<ToolCallsEntry>,
    pub rounds_count: u32,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub tool_calls_count: u32,
    pub halted_reason: HaltReason,
    pub final_digest: String,
    #[serde(default)]
    pub media_degraded: bool,
    #[serde(default)]
    pub format_violations: Vec<String>,
    #[serde(default)]
    pub error_notes: Vec<String>,
    #[serde(default)]
    pub user_warnings: Vec<String>,
    #[serde(default)]
    pub adapter_events: Vec<String>,
    /// Ground truth and its replay digest, embedded by the batch runner so
    /// reports are a pure function of the run directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<crate::task::GroundTruth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_replay_digest: Option<String>,
}

impl TrajectoryLog {
    pub fn from_trajectory(task: &TaskSpec, traj: &Trajectory, model: &str, seed: u64) -> Self {
        let mut dialogue = Vec::new();
        let mut tool_calls = Vec::new();
        for turn in &traj.turns {
            match (&turn.role, &turn.content) {
                (TurnRole::User, TurnContent::Text(text)) => dialogue.push(DialogueEntry {
                    role: "user".into(),
                    turn: turn.index,
                    content: text.clone(),
                    evaluation: turn.evaluation.clone(),
                }),
                (TurnRole::Agent, TurnContent::Text(text)) => {
                    // Agent turns that carried a batch are captured by the
                    // tool_calls entries; only natural replies go into the
                    // dialogue list.
                    if !is_batch_turn(traj, turn) {
                        dialogue.push(DialogueEntry {
                            role: "agent".into(),
                            turn: turn.index,
                            content: text.clone(),
                            evaluation: None,
                        });
                    }
                }
                (TurnRole::ToolBatch, TurnContent::Batch(batch)) => {
                    tool_calls.push(ToolCallsEntry {
                        turn: turn.index,
                        calls: batch.iter().map(|(c, _)| c.clone()).collect(),
                        results: batch
                            .iter()
                            .map(|(c, r)| ToolResultEntry {
                                role: "tool".into(),
                                tool_name: c.tool_name.clone(),
                                parameters: c.parameters.clone(),
                                content: r.wire_text(),
                            })
                            .collect(),
                    });
                }
                _ => {}
            }
        }
        TrajectoryLog {
            task_id: task.task_id.clone(),
            scenario_id: task.scenario_id.clone(),
            mode: traj.mode,
            model: model.to_string(),
            seed,
            instruction: task.instruction.clone(),
            image_description: task.image_description.clone(),
            dialogue,
            tool_calls,
            rounds_count: traj.rounds_count,
            input_tokens: traj.usage.input_tokens,
            output_tokens: traj.usage.output_tokens,
            tool_calls_count: traj.tool_calls_flat.len() as u32,
            halted_reason: traj.halted_reason,
            final_digest: traj.final_digest.digest.clone(),
            media_degraded: traj.media_degraded,
            format_violations: traj.format_violations.clone(),
            error_notes: traj.error_notes.clone(),
            user_warnings: traj.user_warnings.clone(),
            adapter_events: traj.adapter_events.clone(),
            ground_truth: None,
            gt_replay_digest: None,
        }
    }

    /// Executed calls in execution order, reassembled from the batches.
    pub fn flat_tool_calls(&self) -> Vec<ToolCall> {
        self.tool_calls
            .iter()
            .flat_map(|entry| entry.calls.iter().cloned())
            .collect()
    }

    /// The last natural-language agent reply in the dialogue.
    pub fn final_agent_reply(&self) -> Option<&str> {
        self.dialogue
            .iter()
            .rev()
            .find(|e| e.role == "agent")
            .map(|e| e.content.as_str())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("log serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn is_batch_turn(traj: &Trajectory, turn: &Turn) -> bool {
    let pos = traj
        .turns
        .iter()
        .position(|t| std::ptr::eq(t, turn))
        .unwrap_or(usize::MAX);
    traj.turns
        .get(pos.wrapping_add(1))
        .is_some_and(|next| next.role == TurnRole::ToolBatch)
}
