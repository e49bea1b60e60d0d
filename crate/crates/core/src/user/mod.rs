//! Multi-agent simulated user: Actor, Evaluator, and Summarizer.
//!
//! Each user turn runs the Actor, gates its response through the Evaluator's
//! four binary criteria, applies at most one correction pass, and forwards
//! the result. The Summarizer compresses the dialogue into a rolling summary
//! of at most three sentences that feeds the next Actor prompt.

mod noise;
mod prompts;

pub use noise::{hard_mode_noise, noise_pool};
pub use prompts::{
    actor_template, fill, EVALUATOR_TEMPLATE, SERVICE_AGENT_TEMPLATE, STATIC_ENDING,
    SUMMARIZER_TEMPLATE, USER_EASY_TEMPLATE, USER_HARD_TEMPLATE, USER_STATIC_TEMPLATE,
};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{BackendError, ChatBackend, ChatMessage, ChatRequest};
use crate::task::TaskSpec;

/// The three user-agent interaction modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionMode {
    DynamicEasy,
    DynamicHard,
    Static,
}

impl InteractionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InteractionMode::DynamicEasy => "easy",
            InteractionMode::DynamicHard => "hard",
            InteractionMode::Static => "static",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_lowercase().as_str() {
            "easy" | "dynamic_easy" => Some(InteractionMode::DynamicEasy),
            "hard" | "dynamic_hard" => Some(InteractionMode::DynamicHard),
            "static" => Some(InteractionMode::Static),
            _ => None,
        }
    }
}

/// Binary scores on the four behavioral criteria plus the revision
/// suggestion; the suggestion is non-empty exactly when a criterion failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaScores {
    pub role_consistency: u8,
    pub instruction_following: u8,
    pub resilience: u8,
    pub contextual_robustness: u8,
    pub suggestion: String,
}

impl CriteriaScores {
    pub fn all_pass(&self) -> bool {
        self.role_consistency == 1
            && self.instruction_following == 1
            && self.resilience == 1
            && self.contextual_robustness == 1
    }

    pub fn passing() -> Self {
        CriteriaScores {
            role_consistency: 1,
            instruction_following: 1,
            resilience: 1,
            contextual_robustness: 1,
            suggestion: String::new(),
        }
    }
}

/// Per-episode user state. Feedback and the original response travel
/// together: both set during a correction pass, both cleared afterwards.
#[derive(Debug, Clone)]
pub struct UserSessionState {
    pub summary: String,
    pub feedback: Option<String>,
    pub original_response: Option<String>,
    pub mode: InteractionMode,
    pub task: TaskSpec,
    pub turns_taken: u32,
    pub warnings: Vec<String>,
}

impl UserSessionState {
    pub fn new(task: TaskSpec, mode: InteractionMode) -> Self {
        UserSessionState {
            summary: String::new(),
            feedback: None,
            original_response: None,
            mode,
            task,
            turns_taken: 0,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum UserSimError {
    #[error("user backend error: {0}")]
    Backend(#[from] BackendError),
    #[error("malformed evaluation after retry: {0}")]
    MalformedEvaluation(String),
}

/// The three backends driving the simulated user.
pub struct UserSimulator {
    pub actor: Arc<dyn ChatBackend>,
    pub evaluator: Arc<dyn ChatBackend>,
    pub summarizer: Arc<dyn ChatBackend>,
}

impl UserSimulator {
    pub fn new(
        actor: Arc<dyn ChatBackend>,
        evaluator: Arc<dyn ChatBackend>,
        summarizer: Arc<dyn ChatBackend>,
    ) -> Self {
        UserSimulator {
            actor,
            evaluator,
            summarizer,
        }
    }
}

fn single_prompt(backend: &dyn ChatBackend, prompt: String) -> Result<String, BackendError> {
    let request = ChatRequest {
        messages: vec![ChatMessage::user(prompt)],
        tools: vec![],
    };
    backend.complete(&request).map(|r| r.text)
}

/// Runs the Actor once: fills the mode template and returns the backend
/// text. In static mode the message is completed with the ending-constraint
/// sentence when the backend did not produce it.
pub fn actor_respond(
    state: &mut UserSessionState,
    agent_reply: &str,
    backend: &dyn ChatBackend,
) -> Result<String, UserSimError> {
    let template = actor_template(state.mode);
    let prompt = fill(
        template,
        &[
            ("user_instruction", &state.task.instruction),
            ("image_description", &state.task.image_description),
            (
                "original_user_response",
                state.original_response.as_deref().unwrap_or(""),
            ),
            ("evaluation_feedback", state.feedback.as_deref().unwrap_or("")),
            ("history_summary", &state.summary),
            ("service_agent_response", agent_reply),
        ],
    );
    let mut text = single_prompt(backend, prompt)?;
    if state.mode == InteractionMode::Static {
        let trimmed = text.trim_end().to_string();
        if !trimmed.ends_with(STATIC_ENDING) {
            text = format!("{trimmed} {STATIC_ENDING}");
        } else {
            text = trimmed;
        }
    }
    if state.turns_taken == 0
        && state.mode != InteractionMode::Static
        && !text.contains(&state.task.ground_truth.user_id)
    {
        state
            .warnings
            .push("first user message does not state the user_id".into());
    }
    Ok(text)
}

fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    let t = t.strip_prefix("```json").unwrap_or(t);
    let t = t.strip_prefix("```").unwrap_or(t);
    let t = t.strip_suffix("```").unwrap_or(t);
    t.trim()
}

fn parse_scores(text: &str) -> Result<CriteriaScores, String> {
    let cleaned = strip_fences(text);
    let value: serde_json::Value = serde_json::from_str(cleaned)
        .or_else(|_| {
            // Models occasionally wrap the object in prose; take the
            // outermost brace span.
            let start = cleaned.find('{').ok_or(())?;
            let end = cleaned.rfind('}').ok_or(())?;
            serde_json::from_str(&cleaned[start..=end]).map_err(|_| ())
        })
        .map_err(|_| format!("evaluation is not a JSON object: {}", truncate(text)))?;
    let scores = value
        .get("scores")
        .and_then(|s| s.as_object())
        .ok_or_else(|| "missing 'scores' object".to_string())?;
    let read = |field: &str| -> Result<u8, String> {
        let v = scores
            .get(field)
            .and_then(|v| v.as_i64())
            .ok_or_else(|| format!("missing score '{field}'"))?;
        if v == 0 || v == 1 {
            Ok(v as u8)
        } else {
            Err(format!("score '{field}' must be binary, got {v}"))
        }
    };
    let result = CriteriaScores {
        role_consistency: read("role_consistency")?,
        instruction_following: read("instruction_following")?,
        resilience: read("resilience")?,
        contextual_robustness: read("contextual_robustness")?,
        suggestion: value
            .get("suggestion")
            .and_then(|s| s.as_str())
            .unwrap_or("")
            .trim()
            .to_string(),
    };
    if scores.len() != 4 {
        return Err(format!("expected exactly four scores, got {}", scores.len()));
    }
    // Suggestion is non-empty exactly when some criterion failed.
    if result.all_pass() != result.suggestion.is_empty() {
        return Err("suggestion must be non-empty iff a criterion scored 0".into());
    }
    Ok(result)
}

fn truncate(s: &str) -> String {
    let t: String = s.chars().take(120).collect();
    if t.len() < s.len() {
        format!("{t}...")
    } else {
        t
    }
}

/// Runs the Evaluator on one user response. A malformed reply triggers
/// exactly one re-query before failing hard.
pub fn evaluate_response(
    instruction: &str,
    user_msg: &str,
    agent_msg: &str,
    summary: &str,
    backend: &dyn ChatBackend,
) -> Result<CriteriaScores, UserSimError> {
    let prompt = fill(
        EVALUATOR_TEMPLATE,
        &[
            ("user_instruction", instruction),
            ("history_summary", summary),
            ("service_agent_response", agent_msg),
            ("simulated_user_response", user_msg),
        ],
    );
    let first = single_prompt(backend, prompt.clone())?;
    match parse_scores(&first) {
        Ok(scores) => Ok(scores),
        Err(_) => {
            let second = single_prompt(backend, prompt)?;
            parse_scores(&second).map_err(UserSimError::MalformedEvaluation)
        }
    }
}

/// One actor attempt and the scores it received.
#[derive(Debug, Clone, Serialize)]
pub struct GateAttempt {
    pub response: String,
    pub scores: CriteriaScores,
}

/// Outcome of one gated user turn.
#[derive(Debug, Clone, Serialize)]
pub struct GatedTurn {
    /// The forwarded user message.
    pub text: String,
    /// One entry for the first pass, a second when a correction ran.
    pub attempts: Vec<GateAttempt>,
}

impl GatedTurn {
    pub fn correction_applied(&self) -> bool {
        self.attempts.len() > 1
    }

    pub fn final_scores(&self) -> &CriteriaScores {
        &self.attempts.last().expect("at least one attempt").scores
    }
}

/// One full user turn: actor, evaluation, and at most one correction pass.
/// The second response is forwarded regardless of its scores; there is no
/// third attempt.
pub fn gate_user_turn(
    state: &mut UserSessionState,
    agent_reply: &str,
    sim: &UserSimulator,
) -> Result<GatedTurn, UserSimError> {
    let first = actor_respond(state, agent_reply, sim.actor.as_ref())?;
    if state.mode == InteractionMode::Static {
        // Static mode has no evaluator gate: the single message carries the
        // complete request.
        state.turns_taken += 1;
        return Ok(GatedTurn {
            text: first.clone(),
            attempts: vec![GateAttempt {
                response: first,
                scores: CriteriaScores::passing(),
            }],
        });
    }
    let scores = evaluate_response(
        &state.task.instruction,
        &first,
        agent_reply,
        &state.summary,
        sim.evaluator.as_ref(),
    )?;
    let mut attempts = vec![GateAttempt {
        response: first.clone(),
        scores: scores.clone(),
    }];
    let text = if scores.all_pass() {
        state.feedback = None;
        state.original_response = None;
        first
    } else {
        state.feedback = Some(scores.suggestion.clone());
        state.original_response = Some(first);
        let second = actor_respond(state, agent_reply, sim.actor.as_ref())?;
        let second_scores = evaluate_response(
            &state.task.instruction,
            &second,
            agent_reply,
            &state.summary,
            sim.evaluator.as_ref(),
        )?;
        attempts.push(GateAttempt {
            response: second.clone(),
            scores: second_scores,
        });
        // The corrected response is forwarded regardless; clear the
        // correction context so the next turn starts fresh.
        state.feedback = None;
        state.original_response = None;
        second
    };
    state.turns_taken += 1;
    Ok(GatedTurn { text, attempts })
}

/// Splits on sentence-ending punctuation followed by whitespace; advisory
/// for the three-sentence summary contract.
pub fn count_sentences(text: &str) -> usize {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return 0;
    }
    let mut count = 1;
    let chars: Vec<char> = trimmed.chars().collect();
    for i in 0..chars.len().saturating_sub(1) {
        if matches!(chars[i], '.' | '!' | '?') && chars[i + 1].is_whitespace() {
            count += 1;
        }
    }
    count
}

/// Runs the Summarizer; a summary above three sentences is kept and only
/// warned about.
pub fn summarize_turn(
    instruction: &str,
    agent_reply: &str,
    user_msg: &str,
    prev_summary: &str,
    backend: &dyn ChatBackend,
    warnings: &mut Vec<String>,
) -> Result<String, UserSimError> {
    let prompt = fill(
        SUMMARIZER_TEMPLATE,
        &[
            ("user_instruction", instruction),
            ("previous_summary", prev_summary),
            ("agent_response", agent_reply),
            ("user_response", user_msg),
        ],
    );
    let summary = single_prompt(backend, prompt)?;
    let sentences = count_sentences(&summary);
    if sentences > 3 {
        warnings.push(format!(
            "summary has {sentences} sentences, above the 3-sentence contract"
        ));
    }
    Ok(summary)
}

/// STOP detection: the message is exactly `STOP` after trimming or contains
/// the standalone uppercase token.
pub fn is_stop_message(text: &str) -> bool {
    if text.trim() == "STOP" {
        return true;
    }
    text.split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .any(|token| token == "STOP")
}

/// Plain prefix check for the hard-mode complaint marker.
pub fn is_complaint(text: &str) -> bool {
    text.trim_start().starts_with("Bad Service Agent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::ScriptedBackend;
    use crate::task::{GroundTruth, TaskSpec};

    fn task() -> TaskSpec {
        TaskSpec {
            task_id: "t1".into(),
            scenario_id: "retail_demo".into(),
            instruction: "You are a shopper (User ID: alice_1). Buy the green bottle.".into(),
            image_description: "You point at a green bottle.".into(),
            media: None,
            ground_truth: GroundTruth {
                task_id: "t1".into(),
                tool_calls: vec![],
                perception_anchors: vec![],
                user_id: "alice_1".into(),
            },
        }
    }

    fn pass_eval() -> String {
        r#"{"scores": {"role_consistency": 1, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": ""}"#.into()
    }

    fn fail_eval() -> String {
        r#"{"scores": {"role_consistency": 0, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": "Speak as the customer, not the agent."}"#.into()
    }

    #[test]
    fn scripted_actor_line_is_returned_verbatim() {
        let mut state = UserSessionState::new(task(), InteractionMode::DynamicEasy);
        let actor = ScriptedBackend::new("actor", vec!["My user_id is alice_1. Hello.".into()]);
        let text = actor_respond(&mut state, "Dear customer, how can I help you?", &actor).unwrap();
        assert_eq!(text, "My user_id is alice_1. Hello.");
        assert!(state.warnings.is_empty());
    }

    #[test]
    fn correction_pass_fills_feedback_slots() {
        let mut state = UserSessionState::new(task(), InteractionMode::DynamicEasy);
        state.feedback = Some("Do not speak as the agent.".into());
        state.original_response = Some("I will help you process it.".into());
        // The actor prompt must now carry both correction fields.
        let prompt = fill(
            actor_template(state.mode),
            &[
                ("user_instruction", &state.task.instruction),
                ("image_description", &state.task.image_description),
                ("original_user_response", state.original_response.as_deref().unwrap()),
                ("evaluation_feedback", state.feedback.as_deref().unwrap()),
                ("history_summary", ""),
                ("service_agent_response", "agent reply"),
            ],
        );
        assert!(prompt.contains("I will help you process it."));
        assert!(prompt.contains("Do not speak as the agent."));
    }

    #[test]
    fn static_mode_appends_ending_constraint() {
        let mut state = UserSessionState::new(task(), InteractionMode::Static);
        let actor = ScriptedBackend::new("actor", vec!["My user_id is alice_1. Do it all.".into()]);
        let text = actor_respond(&mut state, "", &actor).unwrap();
        assert!(text.ends_with(STATIC_ENDING));
    }

    #[test]
    fn evaluator_parses_strict_json() {
        let backend = ScriptedBackend::new("eval", vec![pass_eval()]);
        let scores = evaluate_response("i", "u", "a", "s", &backend).unwrap();
        assert!(scores.all_pass());
    }

    #[test]
    fn evaluator_requeues_once_then_fails() {
        let backend = ScriptedBackend::new("eval", vec!["garbage".into(), "still garbage".into()]);
        let err = evaluate_response("i", "u", "a", "s", &backend).unwrap_err();
        assert!(matches!(err, UserSimError::MalformedEvaluation(_)));
        assert_eq!(backend.calls(), 2);
    }

    #[test]
    fn evaluator_rejects_nonbinary_scores() {
        let bad = r#"{"scores": {"role_consistency": 2, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": ""}"#;
        assert!(parse_scores(bad).is_err());
    }

    #[test]
    fn suggestion_must_track_failures() {
        let inconsistent = r#"{"scores": {"role_consistency": 0, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": ""}"#;
        assert!(parse_scores(inconsistent).is_err());
        let also_bad = r#"{"scores": {"role_consistency": 1, "instruction_following": 1, "resilience": 1, "contextual_robustness": 1}, "suggestion": "tweak it"}"#;
        assert!(parse_scores(also_bad).is_err());
    }

    #[test]
    fn happy_path_runs_one_actor_and_one_evaluator() {
        let mut state = UserSessionState::new(task(), InteractionMode::DynamicEasy);
        let actor = std::sync::Arc::new(ScriptedBackend::new(
            "actor",
            vec!["My user_id is alice_1. The green one, please.".into()],
        ));
        let evaluator = std::sync::Arc::new(ScriptedBackend::new("eval", vec![pass_eval()]));
        let sim = UserSimulator::new(
            actor.clone(),
            evaluator.clone(),
            std::sync::Arc::new(ScriptedBackend::new("sum", vec!["".into()])),
        );
        let gated = gate_user_turn(&mut state, "hello", &sim).unwrap();
        assert_eq!(actor.calls(), 1);
        assert_eq!(evaluator.calls(), 1);
        assert!(!gated.correction_applied());
        assert!(state.feedback.is_none() && state.original_response.is_none());
    }

    #[test]
    fn failed_first_pass_regenerates_once() {
        let mut state = UserSessionState::new(task(), InteractionMode::DynamicEasy);
        let actor = std::sync::Arc::new(ScriptedBackend::new(
            "actor",
            vec![
                "I will help you process the purchase.".into(),
                "Please add the green bottle for me.".into(),
            ],
        ));
        let evaluator = std::sync::Arc::new(ScriptedBackend::new(
            "eval",
            vec![fail_eval(), pass_eval()],
        ));
        let sim = UserSimulator::new(
            actor.clone(),
            evaluator.clone(),
            std::sync::Arc::new(ScriptedBackend::new("sum", vec!["".into()])),
        );
        let gated = gate_user_turn(&mut state, "hello", &sim).unwrap();
        assert_eq!(actor.calls(), 2);
        assert_eq!(evaluator.calls(), 2);
        assert!(gated.correction_applied());
        assert_eq!(gated.text, "Please add the green bottle for me.");
        assert!(gated.final_scores().all_pass());
    }

    #[test]
    fn double_failure_still_forwards_second_response() {
        let mut state = UserSessionState::new(task(), InteractionMode::DynamicEasy);
        let actor = std::sync::Arc::new(ScriptedBackend::new(
            "actor",
            vec!["bad one".into(), "still bad".into()],
        ));
        let evaluator = std::sync::Arc::new(ScriptedBackend::new(
            "eval",
            vec![fail_eval(), fail_eval()],
        ));
        let sim = UserSimulator::new(
            actor.clone(),
            evaluator.clone(),
            std::sync::Arc::new(ScriptedBackend::new("sum", vec!["".into()])),
        );
        let gated = gate_user_turn(&mut state, "hello", &sim).unwrap();
        assert_eq!(actor.calls(), 2);
        assert_eq!(evaluator.calls(), 2);
        assert_eq!(gated.text, "still bad");
        assert!(!gated.final_scores().all_pass());
    }

    #[test]
    fn stop_detection() {
        assert!(is_stop_message("STOP"));
        assert!(is_stop_message("  STOP  "));
        assert!(is_stop_message("That is all I needed. STOP While I had checked rates last week."));
        assert!(!is_stop_message("please do not stop"));
        assert!(!is_stop_message("STOPPED"));
        assert!(!is_stop_message("unstoppable"));
    }

    #[test]
    fn sentence_counting_splits_on_terminators() {
        assert_eq!(count_sentences(""), 0);
        assert_eq!(count_sentences("One."), 1);
        assert_eq!(count_sentences("One. Two! Three?"), 3);
        assert_eq!(count_sentences("Version 1.2 still counts as one sentence."), 1);
    }
}
