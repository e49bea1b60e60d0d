//! Prompt template assets and placeholder filling.
//!
//! Templates ship as text files with named `{placeholder}` slots. Filling
//! replaces only the known placeholder tokens, so literal braces elsewhere
//! in the templates survive untouched.

use super::InteractionMode;

pub const USER_EASY_TEMPLATE: &str = include_str!("../../assets/prompts/user_easy.txt");
pub const USER_HARD_TEMPLATE: &str = include_str!("../../assets/prompts/user_hard.txt");
pub const USER_STATIC_TEMPLATE: &str = include_str!("../../assets/prompts/user_static.txt");
pub const SERVICE_AGENT_TEMPLATE: &str = include_str!("../../assets/prompts/service_agent.txt");
pub const EVALUATOR_TEMPLATE: &str = include_str!("../../assets/prompts/evaluator.txt");
pub const SUMMARIZER_TEMPLATE: &str = include_str!("../../assets/prompts/summarizer.txt");

/// The sentence every static-mode user message must end with.
pub const STATIC_ENDING: &str = include_str!("../../assets/prompts/static_ending.txt");

/// Replaces each listed `{name}` token with its value.
pub fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in slots {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    out
}

/// The actor template for one interaction mode.
pub fn actor_template(mode: InteractionMode) -> &'static str {
    match mode {
        InteractionMode::DynamicEasy => USER_EASY_TEMPLATE,
        InteractionMode::DynamicHard => USER_HARD_TEMPLATE,
        InteractionMode::Static => USER_STATIC_TEMPLATE,
    }
}
