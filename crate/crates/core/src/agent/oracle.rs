//! Scripted oracle agents built from ground truth.
//!
//! The oracle emits every ground-truth call as one batch in order, answers
//! every further prompt with a short natural reply, and never calls another
//! tool. By construction its executed calls contain the ground-truth set and
//! its final state equals the ground-truth replay state.

use crate::task::GroundTruth;
use crate::tools::ToolCall;

use super::ScriptedBackend;

const ORACLE_CLOSING: &str = "I have completed the requested operations. Is there anything else you need?";

fn batch_text(calls: &[ToolCall]) -> String {
    let batch: Vec<serde_json::Value> = calls
        .iter()
        .map(|call| {
            serde_json::json!({
                "tool_name": call.tool_name,
                "parameters": call.parameters,
            })
        })
        .collect();
    serde_json::Value::Array(batch).to_string()
}

/// An agent that replays the ground-truth calls and then only converses.
pub fn oracle_agent(ground_truth: &GroundTruth) -> ScriptedBackend {
    let mut playbook = Vec::new();
    if !ground_truth.tool_calls.is_empty() {
        playbook.push(batch_text(&ground_truth.tool_calls));
    }
    playbook.push(ORACLE_CLOSING.to_string());
    ScriptedBackend::new("oracle", playbook)
}

/// An oracle that additionally executes extra calls after the ground truth;
/// used to exercise over-operation detection.
pub fn oracle_agent_with_extra(ground_truth: &GroundTruth, extra: Vec<ToolCall>) -> ScriptedBackend {
    let mut calls = ground_truth.tool_calls.clone();
    calls.extend(extra);
    let mut playbook = Vec::new();
    if !calls.is_empty() {
        playbook.push(batch_text(&calls));
    }
    playbook.push(ORACLE_CLOSING.to_string());
    ScriptedBackend::new("oracle+extra", playbook)
}
