//! Classification of agent messages into tool batches and natural replies.

use crate::tools::{validate_call_shape, ToolCall};

/// What an agent message turned out to be.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentMessage {
    ToolCallBatch(Vec<ToolCall>),
    NaturalReply {
        text: String,
        /// Set when the message looked like a tool-call attempt but broke
        /// the format contract (shape error, mixed content, bare record).
        format_violation: Option<String>,
    },
}

fn natural(text: &str, violation: Option<String>) -> AgentMessage {
    AgentMessage::NaturalReply {
        text: text.to_string(),
        format_violation: violation,
    }
}

/// Parses a whole agent message. Total function: anything that is not a
/// clean JSON array of well-formed call records becomes a natural reply,
/// flagged when it was a malformed call attempt.
pub fn parse_agent_message(text: &str) -> AgentMessage {
    let trimmed = text.trim();
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(trimmed) {
        match value {
            serde_json::Value::Array(items) => {
                if items.is_empty() {
                    return natural(text, Some("empty tool-call array".into()));
                }
                let mut calls = Vec::with_capacity(items.len());
                for item in &items {
                    match validate_call_shape(item) {
                        Ok(call) => calls.push(call),
                        Err(err) => {
                            return natural(text, Some(format!("malformed call in array: {err}")))
                        }
                    }
                }
                return AgentMessage::ToolCallBatch(calls);
            }
            serde_json::Value::Object(ref obj) if obj.contains_key("tool_name") => {
                // A bare call record outside an array violates the
                // array-only output contract.
                return natural(text, Some("bare call record outside a JSON array".into()));
            }
            _ => return natural(text, None),
        }
    }
    // Mixed content: a valid call array embedded in prose.
    if let (Some(start), Some(end)) = (trimmed.find('['), trimmed.rfind(']')) {
        if start < end {
            if let Ok(serde_json::Value::Array(items)) =
                serde_json::from_str::<serde_json::Value>(&trimmed[start..=end])
            {
                if !items.is_empty() && items.iter().all(|i| validate_call_shape(i).is_ok()) {
                    return natural(
                        text,
                        Some("tool-call array mixed with surrounding prose".into()),
                    );
                }
            }
        }
    }
    natural(text, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_array_is_a_batch() {
        let msg = r#"[{"tool_name":"get_price","parameters":{"product_name":"Riunite"}}]"#;
        match parse_agent_message(msg) {
            AgentMessage::ToolCallBatch(calls) => {
                assert_eq!(calls.len(), 1);
                assert_eq!(calls[0].tool_name, "get_price");
            }
            other => panic!("expected batch, got {other:?}"),
        }
    }

    #[test]
    fn plain_text_is_a_natural_reply() {
        match parse_agent_message("The wine is $45.") {
            AgentMessage::NaturalReply {
                format_violation, ..
            } => assert!(format_violation.is_none()),
            other => panic!("expected natural reply, got {other:?}"),
        }
    }

    #[test]
    fn array_with_malformed_element_is_flagged() {
        // One element lacks "parameters": the whole message degrades to a
        // flagged natural reply.
        let msg = r#"[{"tool_name":"x"}]"#;
        match parse_agent_message(msg) {
            AgentMessage::NaturalReply {
                format_violation, ..
            } => assert!(format_violation.unwrap().contains("missing")),
            other => panic!("expected flagged natural reply, got {other:?}"),
        }
    }

    #[test]
    fn mixed_prose_and_array_is_flagged() {
        let msg = r#"Let me check. [{"tool_name":"get_cart","parameters":{"user_id":"u1"}}] One moment."#;
        match parse_agent_message(msg) {
            AgentMessage::NaturalReply {
                format_violation, ..
            } => assert!(format_violation.unwrap().contains("mixed")),
            other => panic!("expected flagged natural reply, got {other:?}"),
        }
    }

    #[test]
    fn bare_object_call_is_flagged() {
        let msg = r#"{"tool_name":"get_cart","parameters":{"user_id":"u1"}}"#;
        match parse_agent_message(msg) {
            AgentMessage::NaturalReply {
                format_violation, ..
            } => assert!(format_violation.unwrap().contains("bare call record")),
            other => panic!("expected flagged natural reply, got {other:?}"),
        }
    }

    #[test]
    fn empty_array_is_flagged() {
        match parse_agent_message("[]") {
            AgentMessage::NaturalReply {
                format_violation, ..
            } => assert!(format_violation.unwrap().contains("empty")),
            other => panic!("expected flagged natural reply, got {other:?}"),
        }
    }

    #[test]
    fn multi_call_batches_parse_in_order() {
        let msg = r#"[
            {"tool_name":"get_price","parameters":{"product_name":"a"}},
            {"tool_name":"get_discount","parameters":{"product_name":"b"}}
        ]"#;
        match parse_agent_message(msg) {
            AgentMessage::ToolCallBatch(calls) => {
                assert_eq!(calls[0].tool_name, "get_price");
                assert_eq!(calls[1].tool_name, "get_discount");
            }
            other => panic!("expected batch, got {other:?}"),
        }
    }
}
