//! Ground-truth call matching.
//!
//! A ground-truth call matches an agent call when tool names agree after
//! normalization and every ground-truth parameter equals the agent's value:
//! strings compared normalized, numbers within 1e-6 relative tolerance,
//! arrays order-insensitively when the schema marks the parameter unordered.
//! Extra agent-side parameters are ignored; the ground-truth parameters are
//! the contract. Matching is greedy over ground-truth calls in order, each
//! agent call consumed at most once. Under equality-class edges greedy
//! attains the maximum matching, which the test suite cross-checks against
//! an augmenting-path oracle.

use serde::Serialize;

use crate::scenario::normalize_name;
use crate::tools::{ToolCall, ToolRegistry};

const NUMBER_TOLERANCE: f64 = 1e-6;

/// Which (tool, parameter) array values compare as multisets.
pub type UnorderedLookup<'a> = &'a dyn Fn(&str, &str) -> bool;

/// Array parameters that default to multiset comparison: the calculators'
/// item lists.
fn default_unordered(_tool: &str, param: &str) -> bool {
    matches!(param, "products" | "items" | "dishes")
}

/// Result of matching one ground-truth call list against an agent list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    /// Injective map: (ground-truth index, agent index).
    pub matched_pairs: Vec<(usize, usize)>,
    /// Matched count M.
    pub matched: usize,
    /// Ground-truth size G.
    pub total: usize,
    /// Call deficit G - M.
    pub deficit: usize,
}

impl MatchReport {
    pub fn all_matched(&self) -> bool {
        self.deficit == 0
    }
}

fn numbers_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= NUMBER_TOLERANCE * f64::max(1.0, f64::max(a.abs(), b.abs()))
}

fn values_equal(gt: &serde_json::Value, agent: &serde_json::Value, unordered: bool) -> bool {
    use serde_json::Value;
    match (gt, agent) {
        (Value::String(a), Value::String(b)) => normalize_name(a) == normalize_name(b),
        (Value::Number(a), Value::Number(b)) => {
            numbers_equal(a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN))
        }
        (Value::Bool(a), Value::Bool(b)) => a == b,
        (Value::Null, Value::Null) => true,
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                return false;
            }
            if unordered {
                let mut used = vec![false; b.len()];
                for item in a {
                    let Some(pos) = b
                        .iter()
                        .enumerate()
                        .position(|(i, candidate)| {
                            !used[i] && values_equal(item, candidate, unordered)
                        })
                    else {
                        return false;
                    };
                    used[pos] = true;
                }
                true
            } else {
                a.iter().zip(b).all(|(x, y)| values_equal(x, y, unordered))
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            a.len() == b.len()
                && a.iter().all(|(key, value)| {
                    b.get(key)
                        .is_some_and(|other| values_equal(value, other, unordered))
                })
        }
        _ => false,
    }
}

/// True when `agent` satisfies `gt`: equal tool name and every ground-truth
/// parameter present and equal.
pub fn calls_equivalent(gt: &ToolCall, agent: &ToolCall, unordered: UnorderedLookup) -> bool {
    let tool = normalize_name(&gt.tool_name);
    if tool != normalize_name(&agent.tool_name) {
        return false;
    }
    gt.parameters.iter().all(|(key, value)| {
        agent.parameters.get(key).is_some_and(|other| {
            values_equal(value, other, unordered(&tool, key))
        })
    })
}

/// Greedy injective matching with the default unordered-parameter table.
pub fn match_tool_calls(gt: &[ToolCall], agent: &[ToolCall]) -> MatchReport {
    match_tool_calls_with(gt, agent, &default_unordered)
}

/// Greedy injective matching with an explicit unordered-parameter lookup
/// (usually derived from a tool registry).
pub fn match_tool_calls_with(
    gt: &[ToolCall],
    agent: &[ToolCall],
    unordered: UnorderedLookup,
) -> MatchReport {
    let mut consumed = vec![false; agent.len()];
    let mut matched_pairs = Vec::new();
    for (gt_index, gt_call) in gt.iter().enumerate() {
        let hit = agent.iter().enumerate().find(|(agent_index, agent_call)| {
            !consumed[*agent_index] && calls_equivalent(gt_call, agent_call, unordered)
        });
        if let Some((agent_index, _)) = hit {
            consumed[agent_index] = true;
            matched_pairs.push((gt_index, agent_index));
        }
    }
    let matched = matched_pairs.len();
    MatchReport {
        matched_pairs,
        matched,
        total: gt.len(),
        deficit: gt.len() - matched,
    }
}

/// Unordered-parameter lookup backed by a registry's schema declarations.
pub fn registry_unordered(registry: &ToolRegistry) -> impl Fn(&str, &str) -> bool + '_ {
    move |tool, param| registry.is_unordered_param(tool, param) || default_unordered(tool, param)
}
