//! Dataset-level metrics and ground-truth replay.

use serde::Serialize;
use thiserror::Error;

use crate::scenario::{snapshot, ScenarioDatabase, StateDigest};
use crate::task::GroundTruth;
use crate::tools::{execute, ToolRegistry, ToolStatus};

use super::{classify_error_detailed, match_tool_calls_with, matching::registry_unordered, ErrorLabel, TrajectoryView};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("ground truth for '{task_id}' failed to execute: {message}")]
    GroundTruthInvalid { task_id: String, message: String },
}

/// One scored task: its ground truth, the trajectory view, and the digest
/// obtained by replaying the ground truth on a pristine copy.
#[derive(Debug, Clone)]
pub struct TaskEvaluation {
    pub ground_truth: GroundTruth,
    pub view: TrajectoryView,
    pub gt_replay_digest: String,
}

/// Per-task outcome row.
#[derive(Debug, Clone, Serialize)]
pub struct TaskRow {
    pub task_id: String,
    pub matched: usize,
    pub total: usize,
    pub deficit: usize,
    pub tool_succ: bool,
    pub result_succ: bool,
    pub joint_succ: bool,
    pub error: ErrorLabel,
    pub audit: Vec<String>,
}

/// Dataset aggregates. ToolSucc, ResultSucc, and JointSucc are task-level
/// fractions; MicroAcc is call-level (matched calls over ground-truth
/// calls), so ToolSucc <= MicroAcc does not hold in general.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub rows: Vec<TaskRow>,
    pub tool_succ: f64,
    pub micro_acc: f64,
    pub result_succ: f64,
    pub joint_succ: f64,
}

/// Scores a dataset of tasks.
pub fn compute_metrics(
    tasks: &[TaskEvaluation],
    registry: &ToolRegistry,
) -> Result<MetricsReport, MetricsError> {
    if tasks.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    let unordered = registry_unordered(registry);
    let mut rows = Vec::with_capacity(tasks.len());
    let mut matched_sum = 0usize;
    let mut total_sum = 0usize;
    for task in tasks {
        let report =
            match_tool_calls_with(&task.ground_truth.tool_calls, &task.view.tool_calls, &unordered);
        let result_succ = task.view.final_digest == task.gt_replay_digest;
        let tool_succ = report.all_matched();
        let classification =
            classify_error_detailed(&task.ground_truth, &task.view, result_succ, registry);
        matched_sum += report.matched;
        total_sum += report.total;
        rows.push(TaskRow {
            task_id: task.ground_truth.task_id.clone(),
            matched: report.matched,
            total: report.total,
            deficit: report.deficit,
            tool_succ,
            result_succ,
            joint_succ: tool_succ && result_succ,
            error: classification.label,
            audit: classification.audit,
        });
    }
    let n = rows.len() as f64;
    let fraction = |pred: fn(&TaskRow) -> bool| rows.iter().filter(|r| pred(r)).count() as f64 / n;
    // With no ground-truth calls anywhere every deficit is zero, so the
    // call-level accuracy is vacuously perfect.
    let micro_acc = if total_sum == 0 {
        1.0
    } else {
        matched_sum as f64 / total_sum as f64
    };
    Ok(MetricsReport {
        tool_succ: fraction(|r| r.tool_succ),
        micro_acc,
        result_succ: fraction(|r| r.result_succ),
        joint_succ: fraction(|r| r.joint_succ),
        rows,
    })
}

/// Executes the ground-truth calls on a fresh copy of the pristine database
/// and digests the final state. Any execution error surfaces an annotation
/// bug instead of being swallowed.
pub fn replay_ground_truth(
    gt: &GroundTruth,
    pristine: &ScenarioDatabase,
    registry: &ToolRegistry,
) -> Result<StateDigest, MetricsError> {
    let mut db = pristine.clone();
    for call in &gt.tool_calls {
        let result = execute(&mut db, call, registry);
        if result.status == ToolStatus::Error {
            return Err(MetricsError::GroundTruthInvalid {
                task_id: gt.task_id.clone(),
                message: format!("'{}': {}", call.tool_name, result.message),
            });
        }
    }
    Ok(snapshot(&db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::CatalogCollection;
    use crate::scenario::CatalogRecord;
    use crate::tools::{retail_toolset, ToolCall, ToolRegistry};
    use crate::user::InteractionMode;
    use serde_json::json;

    fn registry() -> ToolRegistry {
        ToolRegistry::register_toolset(retail_toolset()).unwrap()
    }

    fn db() -> ScenarioDatabase {
        let mut db = ScenarioDatabase::empty("s");
        db.catalog.push(CatalogRecord::new(
            CatalogCollection::Products,
            "riunite moscato",
            "wine",
            45.0,
            0.06,
            0.7,
        ));
        db
    }

    fn eval(
        task_id: &str,
        gt_calls: Vec<ToolCall>,
        agent_calls: Vec<ToolCall>,
        final_digest: &str,
        gt_digest: &str,
    ) -> TaskEvaluation {
        TaskEvaluation {
            ground_truth: GroundTruth {
                task_id: task_id.into(),
                tool_calls: gt_calls,
                perception_anchors: vec![],
                user_id: "u".into(),
            },
            view: TrajectoryView {
                mode: InteractionMode::DynamicEasy,
                tool_calls: agent_calls,
                format_violations: vec![],
                final_agent_reply: Some("done".into()),
                final_digest: final_digest.into(),
            },
            gt_replay_digest: gt_digest.into(),
        }
    }

    #[test]
    fn hand_evaluated_two_task_dataset() {
        // Task 1: both calls matched, digests equal. Task 2: one of two
        // matched, digests differ. By the four formulas: ToolSucc 1/2,
        // MicroAcc (2+1)/(2+2) = 0.75, ResultSucc 1/2, JointSucc 1/2.
        let a = ToolCall::new("get_price", json!({"product_name": "a"}));
        let b = ToolCall::new("get_cart", json!({"user_id": "u"}));
        let tasks = vec![
            eval("t1", vec![a.clone(), b.clone()], vec![a.clone(), b.clone()], "d1", "d1"),
            eval("t2", vec![a.clone(), b.clone()], vec![a.clone()], "d2x", "d2"),
        ];
        let report = compute_metrics(&tasks, &registry()).unwrap();
        assert_eq!(report.tool_succ, 0.5);
        assert_eq!(report.micro_acc, 0.75);
        assert_eq!(report.result_succ, 0.5);
        assert_eq!(report.joint_succ, 0.5);
        assert_eq!(report.rows[0].error, ErrorLabel::Correct);
        assert_eq!(report.rows[1].error, ErrorLabel::Logical);
    }

    #[test]
    fn zero_calls_yield_zero_metrics() {
        let a = ToolCall::new("get_price", json!({"product_name": "a"}));
        let tasks = vec![eval(
            "t1",
            vec![a.clone(), a.clone(), a],
            vec![],
            "dx",
            "d",
        )];
        let report = compute_metrics(&tasks, &registry()).unwrap();
        assert_eq!(report.tool_succ, 0.0);
        assert_eq!(report.micro_acc, 0.0);
        assert_eq!(report.joint_succ, 0.0);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        assert!(matches!(
            compute_metrics(&[], &registry()),
            Err(MetricsError::EmptyDataset)
        ));
    }

    #[test]
    fn empty_ground_truth_replay_is_pristine() {
        let pristine = db();
        let gt = GroundTruth {
            task_id: "t".into(),
            tool_calls: vec![],
            perception_anchors: vec![],
            user_id: "u".into(),
        };
        let digest = replay_ground_truth(&gt, &pristine, &registry()).unwrap();
        assert_eq!(digest, snapshot(&pristine));
    }

    #[test]
    fn single_write_replay_changes_digest() {
        let pristine = db();
        let gt = GroundTruth {
            task_id: "t".into(),
            tool_calls: vec![ToolCall::new(
                "add_to_cart",
                json!({"user_id": "u1", "product_name": "riunite moscato", "qty": 1,
                       "category": "wine", "price": 45, "tax_rate": 0.06, "discount": 0.7}),
            )],
            perception_anchors: vec![],
            user_id: "u1".into(),
        };
        let digest = replay_ground_truth(&gt, &pristine, &registry()).unwrap();
        assert_ne!(digest, snapshot(&pristine));
    }

    #[test]
    fn unknown_tool_in_ground_truth_is_invalid() {
        let pristine = db();
        let gt = GroundTruth {
            task_id: "t".into(),
            tool_calls: vec![ToolCall::new("warp_reality", json!({}))],
            perception_anchors: vec![],
            user_id: "u".into(),
        };
        assert!(matches!(
            replay_ground_truth(&gt, &pristine, &registry()),
            Err(MetricsError::GroundTruthInvalid { .. })
        ));
    }
}
