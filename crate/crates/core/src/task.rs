//! Task definitions and their ground truth.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tools::ToolCall;

/// A ground-truth attribute/value pair the agent is expected to query.
///
/// `key` is a parameter name (for example `product_name`); `values` are the
/// entity names a query call must fuzzy-match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptionAnchor {
    pub key: String,
    pub values: Vec<String>,
}

/// The annotated contract for one task: the tool calls required for
/// success, the perception anchors, and the canonical user id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub task_id: String,
    pub tool_calls: Vec<ToolCall>,
    #[serde(default)]
    pub perception_anchors: Vec<PerceptionAnchor>,
    pub user_id: String,
}

/// Reference to an opaque media attachment. The harness never decodes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaRef {
    pub uri: String,
    pub kind: MediaKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    Video,
    Image,
}

/// One evaluation task: the simulated user's brief, the action description
/// standing in for the egocentric video, and the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub scenario_id: String,
    pub instruction: String,
    #[serde(default)]
    pub image_description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media: Option<MediaRef>,
    pub ground_truth: GroundTruth,
}

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("io error reading task file: {0}")]
    Io(#[from] std::io::Error),
    #[error("task file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("task '{task_id}': {message}")]
    Invalid { task_id: String, message: String },
}

/// Extracts the canonical user id from an instruction via the `User ID`
/// pattern (`(User ID: grace_liu_999)`, `Your user ID is cook_009`, ...).
pub fn extract_user_id(instruction: &str) -> Option<String> {
    let re = regex::Regex::new(r"[Uu]ser[ _][Ii][Dd]\s*(?:is\s*[:]?|[:])\s*([A-Za-z0-9_-]+)")
        .expect("static pattern compiles");
    re.captures(instruction)
        .map(|c| c[1].trim_end_matches(['.', ',']).to_string())
}

impl TaskSpec {
    /// Checks the task-level invariants: the instruction carries the
    /// ground-truth user id and ids line up.
    pub fn validate(&self) -> Result<(), TaskError> {
        if self.ground_truth.task_id != self.task_id {
            return Err(TaskError::Invalid {
                task_id: self.task_id.clone(),
                message: format!(
                    "ground truth is for task '{}'",
                    self.ground_truth.task_id
                ),
            });
        }
        match extract_user_id(&self.instruction) {
            Some(id) if id == self.ground_truth.user_id => Ok(()),
            Some(id) => Err(TaskError::Invalid {
                task_id: self.task_id.clone(),
                message: format!(
                    "instruction names user '{id}' but ground truth expects '{}'",
                    self.ground_truth.user_id
                ),
            }),
            None => Err(TaskError::Invalid {
                task_id: self.task_id.clone(),
                message: "instruction does not contain the 'User ID:' pattern".into(),
            }),
        }
    }
}

/// Loads a task file: a JSON array of task specifications.
pub fn load_tasks(path: impl AsRef<Path>) -> Result<Vec<TaskSpec>, TaskError> {
    let text = std::fs::read_to_string(path)?;
    let tasks: Vec<TaskSpec> = serde_json::from_str(&text)?;
    for task in &tasks {
        task.validate()?;
    }
    Ok(tasks)
}
