//! Joint process/result validation and the cascading error taxonomy.

mod classify;
mod compute;
mod matching;

pub use classify::{classify_error, classify_error_detailed, Classification, ErrorLabel};
pub use compute::{
    compute_metrics, replay_ground_truth, MetricsError, MetricsReport, TaskEvaluation, TaskRow,
};
pub use matching::{match_tool_calls, match_tool_calls_with, MatchReport, UnorderedLookup};

use crate::dialogue::Trajectory;
use crate::tools::ToolCall;
use crate::user::InteractionMode;

/// The slice of a trajectory that scoring and classification consume; it can
/// be built from a live [`Trajectory`] or reassembled from a log file.
#[derive(Debug, Clone)]
pub struct TrajectoryView {
    pub mode: InteractionMode,
    pub tool_calls: Vec<ToolCall>,
    pub format_violations: Vec<String>,
    pub final_agent_reply: Option<String>,
    pub final_digest: String,
}

impl From<&Trajectory> for TrajectoryView {
    fn from(traj: &Trajectory) -> Self {
        TrajectoryView {
            mode: traj.mode,
            tool_calls: traj.tool_calls_flat.clone(),
            format_violations: traj.format_violations.clone(),
            final_agent_reply: traj.final_agent_reply().map(|s| s.to_string()),
            final_digest: traj.final_digest.digest.clone(),
        }
    }
}

impl From<&crate::dialogue::TrajectoryLog> for TrajectoryView {
    fn from(log: &crate::dialogue::TrajectoryLog) -> Self {
        TrajectoryView {
            mode: log.mode,
            tool_calls: log.flat_tool_calls(),
            format_violations: log.format_violations.clone(),
            final_agent_reply: log.final_agent_reply().map(|s| s.to_string()),
            final_digest: log.final_digest.clone(),
        }
    }
}
