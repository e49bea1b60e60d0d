//! Canonical serialization and state digests.
//!
//! The digest is a pure function of the canonical form: catalog collections
//! and ledger kinds are emitted in a fixed order, records and items are
//! sorted by normalized name, ledgers by user id, attribute lists are
//! sorted, and every number is rendered with exactly six decimal places.
//! The hash itself (SHA-256 over the canonical bytes) is an implementation
//! choice; the canonical form is the contract.

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{CatalogCollection, LedgerKind, ScenarioDatabase, ScenarioError};

/// Fixed-width digest over the canonical serialization of a database.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateDigest {
    /// Hex-encoded SHA-256 of the canonical bytes.
    pub digest: String,
    /// Collections covered by the canonical form, in emission order.
    pub covered_collections: Vec<String>,
}

impl std::fmt::Display for StateDigest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.digest)
    }
}

/// Renders a number with the canonical fixed precision (6 decimal places).
///
/// Negative zero is folded into zero so that `-0.0` and `0.0` canonicalize
/// identically.
pub fn canonical_number(value: f64) -> String {
    let v = if value == 0.0 { 0.0 } else { value };
    format!("{v:.6}")
}

fn escape(out: &mut String, s: &str) {
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '|' => out.push_str("\\|"),
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
}

fn canonical_json(out: &mut String, value: &serde_json::Value) {
    match value {
        serde_json::Value::Null => out.push_str("null"),
        serde_json::Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        serde_json::Value::Number(n) => {
            out.push_str(&canonical_number(n.as_f64().unwrap_or(0.0)))
        }
        serde_json::Value::String(s) => {
            out.push('"');
            escape(out, s);
            out.push('"');
        }
        // Arrays stay in order: extras such as cooking steps are sequences.
        serde_json::Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                canonical_json(out, item);
            }
            out.push(']');
        }
        serde_json::Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('"');
                escape(out, key);
                out.push_str("\":");
                canonical_json(out, &map[key]);
            }
            out.push('}');
        }
    }
}

/// Produces the canonical byte serialization of a database.
pub fn canonical_bytes(db: &ScenarioDatabase) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("scenario=");
    escape(&mut out, &db.scenario_id);
    out.push('\n');

    for collection in CatalogCollection::ALL {
        out.push_str(collection.key());
        out.push('\n');
        let mut records: Vec<_> = db
            .catalog
            .iter()
            .filter(|r| r.collection == collection)
            .collect();
        records.sort_by(|a, b| a.name.cmp(&b.name));
        for record in records {
            out.push_str("  name=");
            escape(&mut out, &record.name);
            out.push_str("|category=");
            escape(&mut out, &record.category);
            out.push_str("|price=");
            out.push_str(&canonical_number(record.price));
            out.push_str("|tax_rate=");
            out.push_str(&canonical_number(record.tax_rate));
            out.push_str("|discount=");
            out.push_str(&canonical_number(record.discount));
            for (label, list) in [
                ("taste", &record.taste),
                ("nutritional_characteristics", &record.nutritional_characteristics),
                ("allergens", &record.allergens),
            ] {
                let mut sorted = list.clone();
                sorted.sort();
                out.push('|');
                out.push_str(label);
                out.push('=');
                for (i, entry) in sorted.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    escape(&mut out, entry);
                }
            }
            out.push_str("|country=");
            match &record.country_of_origin {
                Some(c) => escape(&mut out, c),
                None => out.push_str("\\0"),
            }
            out.push_str("|nutrition=");
            let n = &record.nutrition;
            out.push_str(match n.basis {
                super::NutritionBasis::Per100g => "PER_100G",
                super::NutritionBasis::Total => "TOTAL",
            });
            for v in [
                n.serving_size_g,
                n.calories_kcal,
                n.protein_g,
                n.fat_g,
                n.carbs_g,
                n.sugar_g,
                n.sodium_mg,
                n.fiber_g,
            ] {
                out.push(',');
                out.push_str(&canonical_number(v));
            }
            out.push_str("|extra=");
            canonical_json(&mut out, &serde_json::Value::Object(record.extra.clone()));
            out.push('\n');
        }
    }

    for kind in LedgerKind::ALL {
        out.push_str(kind.key());
        out.push('\n');
        let mut ledgers: Vec<_> = db
            .ledgers
            .get(&kind)
            .map(|l| l.iter().filter(|u| !u.items.is_empty()).collect())
            .unwrap_or_default();
        ledgers.sort_by(|a, b| a.user_id.cmp(&b.user_id));
        for ledger in ledgers {
            out.push_str("  user=");
            escape(&mut out, &ledger.user_id);
            out.push('\n');
            let mut items: Vec<_> = ledger.items.iter().collect();
            items.sort_by(|a, b| a.name.cmp(&b.name));
            for item in items {
                out.push_str("    ");
                escape(&mut out, &item.name);
                out.push_str("|qty=");
                out.push_str(&canonical_number(item.quantity));
                if let Some(p) = &item.priced {
                    out.push_str("|category=");
                    escape(&mut out, &p.category);
                    out.push_str("|price=");
                    out.push_str(&canonical_number(p.price));
                    out.push_str("|tax_rate=");
                    out.push_str(&canonical_number(p.tax_rate));
                    out.push_str("|discount=");
                    out.push_str(&canonical_number(p.discount));
                }
                out.push('\n');
            }
        }
    }
    out.into_bytes()
}

/// Deterministic digest of the full mutable state.
pub fn snapshot(db: &ScenarioDatabase) -> StateDigest {
    let bytes = canonical_bytes(db);
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut covered: Vec<String> = CatalogCollection::ALL
        .iter()
        .map(|c| c.key().to_string())
        .collect();
    covered.extend(LedgerKind::ALL.iter().map(|k| k.key().to_string()));
    StateDigest {
        digest: hex_encode(&digest),
        covered_collections: covered,
    }
}

fn hex_encode(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// True iff both databases canonicalize to the same digest.
///
/// Fails with [`ScenarioError::ScenarioMismatch`] when the databases come
/// from different scenarios.
pub fn states_equivalent(
    a: &ScenarioDatabase,
    b: &ScenarioDatabase,
) -> Result<bool, ScenarioError> {
    if a.scenario_id != b.scenario_id {
        return Err(ScenarioError::ScenarioMismatch {
            expected: a.scenario_id.clone(),
            actual: b.scenario_id.clone(),
        });
    }
    Ok(snapshot(a) == snapshot(b))
}
