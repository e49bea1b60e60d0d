//! Budget enforcement over episode counters.

use super::{EpisodeConfig, HaltReason};

/// Progress counters consulted by budget checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct BudgetCounters {
    pub user_turns: u32,
    pub tool_calls: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetDecision {
    Continue,
    Halt(HaltReason),
}

/// Halts with TOOL_LIMIT the moment another call would exceed the cap, and
/// with TURN_LIMIT when user turns are exhausted. Checked before executing
/// each call and at the top of each outer turn.
pub fn enforce_budgets(counters: &BudgetCounters, cfg: &EpisodeConfig) -> BudgetDecision {
    if counters.tool_calls >= cfg.max_tool_calls {
        return BudgetDecision::Halt(HaltReason::ToolLimit);
    }
    if counters.user_turns >= cfg.max_user_turns {
        return BudgetDecision::Halt(HaltReason::TurnLimit);
    }
    BudgetDecision::Continue
}
