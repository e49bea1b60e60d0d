//! Cascading root-cause classification of failed tasks.
//!
//! Predicates are evaluated in a strict order and the first firing one
//! labels the task, so downstream consequences of an upstream failure are
//! never double-counted. A task with all ground-truth calls matched and an
//! equivalent final state is Correct and skips the cascade entirely.

use serde::{Deserialize, Serialize};

use crate::scenario::normalize_name;
use crate::task::GroundTruth;
use crate::tools::{fuzzy_match, ToolKind, ToolRegistry};
use crate::user::InteractionMode;

use super::{match_tool_calls_with, matching::registry_unordered, TrajectoryView};

/// Exactly one label per task, mutually exclusive by cascade order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorLabel {
    /// c1: malformed or absent tool calls, or a static-mode question
    /// instead of action.
    Structural,
    /// c2: a perception anchor value was never queried.
    Perception,
    /// c3: a fabricated user id appears in a call.
    Hallucination,
    /// c4: call deficit >= 1.
    Logical,
    /// c5: all calls matched yet the final state diverged.
    OverOperation,
    Correct,
}

impl ErrorLabel {
    pub const ALL: [ErrorLabel; 6] = [
        ErrorLabel::Structural,
        ErrorLabel::Perception,
        ErrorLabel::Hallucination,
        ErrorLabel::Logical,
        ErrorLabel::OverOperation,
        ErrorLabel::Correct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorLabel::Structural => "STRUCTURAL",
            ErrorLabel::Perception => "PERCEPTION",
            ErrorLabel::Hallucination => "HALLUCINATION",
            ErrorLabel::Logical => "LOGICAL",
            ErrorLabel::OverOperation => "OVER_OPERATION",
            ErrorLabel::Correct => "CORRECT",
        }
    }
}

/// A label plus the audit trail of what fired it.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub label: ErrorLabel,
    pub audit: Vec<String>,
}

/// Returns the root-cause label for one task.
pub fn classify_error(
    gt: &GroundTruth,
    view: &TrajectoryView,
    result_correct: bool,
    registry: &ToolRegistry,
) -> ErrorLabel {
    classify_error_detailed(gt, view, result_correct, registry).label
}

/// Classification with audit details for reports.
pub fn classify_error_detailed(
    gt: &GroundTruth,
    view: &TrajectoryView,
    result_correct: bool,
    registry: &ToolRegistry,
) -> Classification {
    let unordered = registry_unordered(registry);
    let report = match_tool_calls_with(&gt.tool_calls, &view.tool_calls, &unordered);

    // Correct iff all ground-truth calls are matched and the result-based
    // check passed; only failures enter the cascade.
    if report.all_matched() && result_correct {
        return Classification {
            label: ErrorLabel::Correct,
            audit: vec![format!("matched {}/{} calls, states equivalent", report.matched, report.total)],
        };
    }

    // c1: structural non-compliance.
    if !view.format_violations.is_empty() {
        return Classification {
            label: ErrorLabel::Structural,
            audit: view.format_violations.clone(),
        };
    }
    if view.tool_calls.is_empty() {
        return Classification {
            label: ErrorLabel::Structural,
            audit: vec!["no tool call was emitted over the whole episode".into()],
        };
    }
    if view.mode == InteractionMode::Static && report.deficit >= 1 {
        if let Some(reply) = &view.final_agent_reply {
            if reply.contains('?') {
                return Classification {
                    label: ErrorLabel::Structural,
                    audit: vec![format!(
                        "static mode: agent asked the user instead of acting: {:?}",
                        truncate(reply)
                    )],
                };
            }
        }
    }

    // c2: perception anchors never queried (skipped when a task carries no
    // anchors).
    let query_calls: Vec<_> = view
        .tool_calls
        .iter()
        .filter(|call| registry.kind_of(&call.tool_name) == Some(ToolKind::Read))
        .collect();
    for anchor in &gt.perception_anchors {
        for value in &anchor.values {
            let target = vec![normalize_name(value)];
            let queried = query_calls.iter().any(|call| {
                call.str_param(&anchor.key)
                    .is_some_and(|param| fuzzy_match(param, &target).is_match())
            });
            if !queried {
                return Classification {
                    label: ErrorLabel::Perception,
                    audit: vec![format!(
                        "anchor {}={value:?} never fuzzy-matched by a query call",
                        anchor.key
                    )],
                };
            }
        }
    }

    // c3: fabricated user id in any call.
    let expected = normalize_name(&gt.user_id);
    for call in &view.tool_calls {
        if let Some(user_id) = call.str_param("user_id") {
            if normalize_name(user_id) != expected {
                return Classification {
                    label: ErrorLabel::Hallucination,
                    audit: vec![format!(
                        "call '{}' used user_id {user_id:?}, expected {:?}",
                        call.tool_name, gt.user_id
                    )],
                };
            }
        }
    }

    // c4: call deficit.
    if report.deficit >= 1 {
        return Classification {
            label: ErrorLabel::Logical,
            audit: vec![format!(
                "call deficit {} ({} of {} matched)",
                report.deficit, report.matched, report.total
            )],
        };
    }

    // c5: everything matched yet the state diverged.
    Classification {
        label: ErrorLabel::OverOperation,
        audit: vec!["all ground-truth calls matched but the final state differs".into()],
    }
}

fn truncate(s: &str) -> String {
    let t: String = s.chars().take(100).collect();
    if t.len() < s.len() {
        format!("{t}...")
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tools::{retail_toolset, ToolCall, ToolRegistry};
    use serde_json::json;

    fn registry() -> ToolRegistry {
        ToolRegistry::register_toolset(retail_toolset()).unwrap()
    }

    fn gt(calls: Vec<ToolCall>) -> GroundTruth {
        GroundTruth {
            task_id: "t".into(),
            tool_calls: calls,
            perception_anchors: vec![],
            user_id: "alice_1".into(),
        }
    }

    fn view(calls: Vec<ToolCall>) -> TrajectoryView {
        TrajectoryView {
            mode: InteractionMode::DynamicEasy,
            tool_calls: calls,
            format_violations: vec![],
            final_agent_reply: Some("All done.".into()),
            final_digest: "d".into(),
        }
    }

    #[test]
    fn shape_violation_beats_everything() {
        let truth = gt(vec![ToolCall::new("get_cart", json!({"user_id": "alice_1"}))]);
        let mut v = view(vec![ToolCall::new("get_cart", json!({"user_id": "wrong_9"}))]);
        v.format_violations.push("malformed call in array".into());
        // Both a shape error and a wrong user id: the cascade picks c1.
        assert_eq!(
            classify_error(&truth, &v, false, &registry()),
            ErrorLabel::Structural
        );
    }

    #[test]
    fn wrong_user_id_is_hallucination() {
        let truth = gt(vec![ToolCall::new("get_cart", json!({"user_id": "alice_1"}))]);
        let v = view(vec![ToolCall::new("get_cart", json!({"user_id": "bob_2"}))]);
        assert_eq!(
            classify_error(&truth, &v, false, &registry()),
            ErrorLabel::Hallucination
        );
    }

    #[test]
    fn missing_call_is_logical() {
        let truth = gt(vec![
            ToolCall::new("get_cart", json!({"user_id": "alice_1"})),
            ToolCall::new("get_price", json!({"product_name": "wine"})),
        ]);
        let v = view(vec![ToolCall::new("get_cart", json!({"user_id": "alice_1"}))]);
        assert_eq!(
            classify_error(&truth, &v, false, &registry()),
            ErrorLabel::Logical
        );
    }

    #[test]
    fn matched_but_wrong_state_is_over_operation() {
        let truth = gt(vec![ToolCall::new("get_cart", json!({"user_id": "alice_1"}))]);
        let v = view(vec![
            ToolCall::new("get_cart", json!({"user_id": "alice_1"})),
            ToolCall::new(
                "add_to_cart",
                json!({"user_id": "alice_1", "product_name": "x", "qty": 1,
                       "category": "wine", "price": 1, "tax_rate": 0, "discount": 1}),
            ),
        ]);
        assert_eq!(
            classify_error(&truth, &v, false, &registry()),
            ErrorLabel::OverOperation
        );
    }

    #[test]
    fn matched_and_correct_is_correct() {
        let truth = gt(vec![ToolCall::new("get_cart", json!({"user_id": "alice_1"}))]);
        let v = view(vec![ToolCall::new("get_cart", json!({"user_id": "alice_1"}))]);
        assert_eq!(
            classify_error(&truth, &v, true, &registry()),
            ErrorLabel::Correct
        );
    }

    #[test]
    fn missed_anchor_is_perception() {
        let mut truth = gt(vec![ToolCall::new(
            "get_price",
            json!({"product_name": "riunite moscato"}),
        )]);
        truth.perception_anchors.push(crate::task::PerceptionAnchor {
            key: "product_name".into(),
            values: vec!["riunite moscato".into()],
        });
        // The agent queried something unrelated: the anchor never matched.
        let v = view(vec![ToolCall::new(
            "get_price",
            json!({"product_name": "heineken beer"}),
        )]);
        assert_eq!(
            classify_error(&truth, &v, false, &registry()),
            ErrorLabel::Perception
        );
        // A fuzzy partial query satisfies the anchor; the deficit then
        // surfaces as logical.
        let v = view(vec![ToolCall::new(
            "get_price",
            json!({"product_name": "Riunite"}),
        )]);
        assert_eq!(
            classify_error(&truth, &v, false, &registry()),
            ErrorLabel::Logical
        );
    }

    #[test]
    fn static_question_with_unmet_ground_truth_is_structural() {
        let truth = gt(vec![ToolCall::new("get_cart", json!({"user_id": "alice_1"}))]);
        let mut v = view(vec![ToolCall::new(
            "get_price",
            json!({"product_name": "wine"}),
        )]);
        v.mode = InteractionMode::Static;
        v.final_agent_reply = Some("Could you tell me your user id?".into());
        assert_eq!(
            classify_error(&truth, &v, false, &registry()),
            ErrorLabel::Structural
        );
    }

    #[test]
    fn empty_gt_zero_calls_correct_result_is_correct() {
        let truth = gt(vec![]);
        let v = view(vec![]);
        assert_eq!(
            classify_error(&truth, &v, true, &registry()),
            ErrorLabel::Correct
        );
    }
}
