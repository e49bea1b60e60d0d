//! The episode loop: user turns, agent inner iterations, tool execution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{AgentAdapter, ChatMessage};
use crate::scenario::{snapshot, ScenarioDatabase};
use crate::task::TaskSpec;
use crate::tools::{execute, ToolRegistry};
use crate::user::{
    fill, gate_user_turn, hard_mode_noise, is_complaint, is_stop_message, summarize_turn,
    InteractionMode, UserSessionState, UserSimulator, SERVICE_AGENT_TEMPLATE,
};

use super::{
    enforce_budgets, parse_agent_message, AgentMessage, BudgetCounters, BudgetDecision,
    EpisodeConfig, HaltReason, Trajectory, Turn, TurnContent, TurnEvaluation, TurnRole,
};

/// The agent's initial greeting; it seeds the first actor prompt and is not
/// part of the dialogue record.
pub const AGENT_GREETING: &str = "Dear customer, how can I help you?";

/// Builds the agent-side system prompt: the service template with the tool
/// schema documents filled in, plus the action description when the backend
/// cannot take the media itself.
fn system_prompt(task: &TaskSpec, registry: &ToolRegistry, degrade_media: bool) -> String {
    let docs = serde_json::Value::Array(registry.schema_documents());
    let mut prompt = fill(
        SERVICE_AGENT_TEMPLATE,
        &[("tool_descriptions", &docs.to_string())],
    );
    if degrade_media {
        prompt.push_str("\n\n## Video Context (described)\n");
        prompt.push_str(&task.image_description);
    }
    prompt
}

/// Runs one episode for one task against a pristine database.
///
/// Backend failures and exhausted inner loops never panic or propagate: they
/// are recorded in `error_notes` and the episode halts with `AGENT_ERROR`.
pub fn run_episode(
    task: &TaskSpec,
    agent: &AgentAdapter,
    user: &UserSimulator,
    db: &mut ScenarioDatabase,
    registry: &ToolRegistry,
    cfg: &EpisodeConfig,
) -> Trajectory {
    cfg.validate().expect("episode config bounds are positive");
    let mut state = UserSessionState::new(task.clone(), cfg.mode);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
    let tool_docs = registry.schema_documents();

    let media_degraded = task.media.is_some() && !agent.supports_media;
    let degrade_text = media_degraded || task.media.is_none();
    let mut system = ChatMessage::system(system_prompt(task, registry, degrade_text));
    if let (Some(media), true) = (&task.media, agent.supports_media) {
        system.media.push(media.clone());
    }

    let mut traj = Trajectory {
        task_id: task.task_id.clone(),
        mode: cfg.mode,
        turns: Vec::new(),
        final_digest: snapshot(db),
        halted_reason: HaltReason::TurnLimit,
        tool_calls_flat: Vec::new(),
        format_violations: Vec::new(),
        error_notes: Vec::new(),
        usage: Default::default(),
        user_turns: 0,
        rounds_count: 0,
        user_warnings: Vec::new(),
        media_degraded,
        adapter_events: Vec::new(),
    };

    let mut history = vec![system];
    let mut last_agent_reply = AGENT_GREETING.to_string();
    let mut counters = BudgetCounters::default();
    let mut consecutive_complaints = 0u32;
    let mut halted: Option<HaltReason> = None;

    'episode: while halted.is_none() {
        if let BudgetDecision::Halt(reason) = enforce_budgets(&counters, cfg) {
            halted = Some(reason);
            break;
        }
        let round = counters.user_turns;

        // --- simulated user turn ---
        let gated = match gate_user_turn(&mut state, &last_agent_reply, user) {
            Ok(gated) => gated,
            Err(err) => {
                traj.error_notes.push(format!("user pipeline: {err}"));
                halted = Some(HaltReason::AgentError);
                break;
            }
        };
        let mut user_text = gated.text.clone();
        if cfg.mode == InteractionMode::DynamicHard {
            user_text = hard_mode_noise(&task.scenario_id, &user_text, &mut rng);
        }
        traj.turns.push(Turn {
            role: TurnRole::User,
            index: round,
            content: TurnContent::Text(user_text.clone()),
            token_usage: None,
            evaluation: Some(TurnEvaluation {
                scores: gated.final_scores().clone(),
                original_response: if gated.correction_applied() {
                    Some(gated.attempts[0].response.clone())
                } else {
                    None
                },
                correction_applied: gated.correction_applied(),
            }),
        });
        counters.user_turns += 1;
        traj.user_turns = counters.user_turns;

        if is_stop_message(&user_text) {
            halted = Some(HaltReason::UserStop);
            break;
        }
        if cfg.mode == InteractionMode::DynamicHard {
            if is_complaint(&user_text) {
                consecutive_complaints += 1;
            } else {
                consecutive_complaints = 0;
            }
            if let Some(limit) = cfg.terminate_after_complaints {
                if consecutive_complaints >= limit {
                    halted = Some(HaltReason::UserTerminated);
                    break;
                }
            }
        }
        history.push(ChatMessage::user(user_text.clone()));

        // --- agent inner loop: tool batches until a natural reply ---
        let mut answered = false;
        for _ in 0..cfg.max_inner_iterations {
            let outcome = match agent.send(&history, &tool_docs) {
                Ok(result) => result,
                Err(err) => {
                    traj.error_notes.push(format!("agent backend: {err}"));
                    halted = Some(HaltReason::AgentError);
                    break 'episode;
                }
            };
            let (reply, usage) = (outcome.text, outcome.usage);
            if outcome.truncated_tool_results > 0 {
                traj.adapter_events.push(format!(
                    "context budget: elided {} old tool-result payload(s)",
                    outcome.truncated_tool_results
                ));
            }
            traj.usage.add(usage);
            match parse_agent_message(&reply) {
                AgentMessage::ToolCallBatch(calls) => {
                    traj.turns.push(Turn {
                        role: TurnRole::Agent,
                        index: round,
                        content: TurnContent::Text(reply.clone()),
                        token_usage: Some((usage.input_tokens, usage.output_tokens)),
                        evaluation: None,
                    });
                    history.push(ChatMessage::assistant(reply));
                    let mut executed = Vec::new();
                    let mut over_budget = false;
                    for call in calls {
                        if let BudgetDecision::Halt(reason) = enforce_budgets(&counters, cfg) {
                            // Execute up to the cap, drop the remainder.
                            halted = Some(reason);
                            over_budget = true;
                            break;
                        }
                        let result = execute(db, &call, registry);
                        counters.tool_calls += 1;
                        traj.tool_calls_flat.push(call.clone());
                        executed.push((call, result));
                    }
                    let results_text = executed
                        .iter()
                        .map(|(_, r)| r.wire_text())
                        .collect::<Vec<_>>()
                        .join("; ");
                    traj.turns.push(Turn {
                        role: TurnRole::ToolBatch,
                        index: round,
                        content: TurnContent::Batch(executed),
                        token_usage: None,
                        evaluation: None,
                    });
                    history.push(ChatMessage::tool(results_text));
                    if over_budget {
                        break 'episode;
                    }
                }
                AgentMessage::NaturalReply {
                    text,
                    format_violation,
                } => {
                    if let Some(violation) = format_violation {
                        traj.format_violations.push(violation);
                    }
                    traj.turns.push(Turn {
                        role: TurnRole::Agent,
                        index: round,
                        content: TurnContent::Text(text.clone()),
                        token_usage: Some((usage.input_tokens, usage.output_tokens)),
                        evaluation: None,
                    });
                    history.push(ChatMessage::assistant(text.clone()));
                    last_agent_reply = text;
                    traj.rounds_count += 1;
                    answered = true;
                    break;
                }
            }
        }
        if !answered {
            if halted.is_none() {
                traj.error_notes.push(format!(
                    "agent never produced a natural-language reply within {} iterations",
                    cfg.max_inner_iterations
                ));
                halted = Some(HaltReason::AgentError);
            }
            break;
        }

        if cfg.mode == InteractionMode::Static {
            // A single complete request; the episode ends after the agent's
            // reply to it.
            halted = Some(HaltReason::UserStop);
            break;
        }

        match summarize_turn(
            &task.instruction,
            &last_agent_reply,
            &gated.text,
            &state.summary.clone(),
            user.summarizer.as_ref(),
            &mut state.warnings,
        ) {
            Ok(summary) => state.summary = summary,
            Err(err) => {
                traj.error_notes.push(format!("summarizer: {err}"));
                halted = Some(HaltReason::AgentError);
                break;
            }
        }
    }

    traj.halted_reason = halted.unwrap_or(HaltReason::TurnLimit);
    traj.user_warnings = state.warnings;
    traj.final_digest = snapshot(db);
    traj
}
