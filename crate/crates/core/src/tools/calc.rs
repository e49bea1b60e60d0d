//! Calculation tools: payment, tax, and nutrition totals.
//!
//! Calculators resolve item names at the exact normalized tier only; names
//! that do not resolve are listed in a partial_success message while the
//! totals cover the resolvable subset. Prices are tax-inclusive, so the tax
//! contained in a discounted amount is extracted as
//! `amount * tax_rate / (1 + tax_rate)`.

use serde_json::json;

use crate::scenario::{normalize_name, NutritionBasis, NutritionFacts, ScenarioDatabase};

use super::{ToolCall, ToolResult, ToolStatus};

/// Half-up rounding to two decimals, applied only at result boundaries.
pub fn round2(value: f64) -> f64 {
    (value * 100.0).round() / 100.0
}

fn round6(value: f64) -> f64 {
    (value * 1e6).round() / 1e6
}

/// One requested (name, quantity) pair, name already normalized.
struct RequestedItem {
    name: String,
    quantity: f64,
}

fn parse_items(call: &ToolCall) -> Result<Vec<RequestedItem>, String> {
    let raw = ["products", "items", "dishes"]
        .iter()
        .find_map(|key| call.parameters.get(*key))
        .ok_or_else(|| "Missing required parameter: 'products'".to_string())?;
    let arr = raw
        .as_array()
        .ok_or_else(|| "'products' must be an array".to_string())?;
    let mut items = Vec::new();
    for entry in arr {
        let obj = entry
            .as_object()
            .ok_or_else(|| "'products' entries must be objects".to_string())?;
        let name = obj
            .iter()
            .find(|(k, _)| k.ends_with("_name") || *k == "name")
            .and_then(|(_, v)| v.as_str())
            .ok_or_else(|| "product entry is missing a name".to_string())?;
        let quantity = obj
            .get("quantity")
            .or_else(|| obj.get("qty"))
            .and_then(|v| v.as_f64())
            .ok_or_else(|| "product entry is missing 'quantity'".to_string())?;
        if !quantity.is_finite() || quantity <= 0.0 {
            return Err(format!("quantity for '{name}' must be strictly positive"));
        }
        items.push(RequestedItem {
            name: normalize_name(name),
            quantity,
        });
    }
    Ok(items)
}

fn split_resolvable<'a>(
    db: &'a ScenarioDatabase,
    items: &'a [RequestedItem],
) -> (Vec<(&'a RequestedItem, &'a crate::scenario::CatalogRecord)>, Vec<&'a str>) {
    let mut resolved = Vec::new();
    let mut missing = Vec::new();
    for item in items {
        match db.catalog_record(&item.name) {
            Some(record) => resolved.push((item, record)),
            None => missing.push(item.name.as_str()),
        }
    }
    (resolved, missing)
}

fn outcome(missing: &[&str]) -> (ToolStatus, String) {
    if missing.is_empty() {
        (ToolStatus::Success, "Calculation completed successfully.".to_string())
    } else {
        (
            ToolStatus::PartialSuccess,
            format!(
                "Calculated successfully. However, {} product(s) not found in catalog: {}",
                missing.len(),
                missing.join(", ")
            ),
        )
    }
}

pub(super) fn compute_total_payment(db: &ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let user_id = match call.str_param("user_id") {
        Some(u) => u,
        None => return ToolResult::error("Missing required parameter: 'user_id'"),
    };
    let items = match parse_items(call) {
        Ok(items) => items,
        Err(msg) => return ToolResult::error(&msg),
    };
    let (resolved, missing) = split_resolvable(db, &items);
    let mut total = 0.0;
    let mut details = Vec::new();
    for (item, record) in resolved {
        let amount = record.price * record.discount * item.quantity;
        total += amount;
        details.push(json!({
            "product_name": item.name,
            "quantity": item.quantity,
            "subtotal": round2(amount),
        }));
    }
    let (status, message) = outcome(&missing);
    ToolResult::calc(
        status,
        &message,
        json!({
            "user_id": user_id,
            "total": round2(total),
            "details": details,
        }),
    )
}

pub(super) fn compute_total_tax(db: &ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let user_id = match call.str_param("user_id") {
        Some(u) => u,
        None => return ToolResult::error("Missing required parameter: 'user_id'"),
    };
    let items = match parse_items(call) {
        Ok(items) => items,
        Err(msg) => return ToolResult::error(&msg),
    };
    let (resolved, missing) = split_resolvable(db, &items);
    let mut total = 0.0;
    let mut details = Vec::new();
    for (item, record) in resolved {
        let amount = record.price * record.discount * item.quantity;
        let tax = round2(amount * record.tax_rate / (1.0 + record.tax_rate));
        total += tax;
        details.push(json!({
            "product_name": item.name,
            "quantity": item.quantity,
            "tax_amount": tax,
        }));
    }
    let (status, message) = outcome(&missing);
    ToolResult::calc(
        status,
        &message,
        json!({
            "user_id": user_id,
            "total_tax": round2(total),
            "details": details,
        }),
    )
}

pub(super) fn compute_total_nutrition(db: &ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let user_id = match call.str_param("user_id") {
        Some(u) => u,
        None => return ToolResult::error("Missing required parameter: 'user_id'"),
    };
    let items = match parse_items(call) {
        Ok(items) => items,
        Err(msg) => return ToolResult::error(&msg),
    };
    for item in &items {
        if item.quantity.fract() != 0.0 {
            return ToolResult::error(&format!(
                "quantity for '{}' must be a positive integer serving count",
                item.name
            ));
        }
    }
    let (resolved, missing) = split_resolvable(db, &items);
    let mut total = NutritionFacts::zero(NutritionBasis::Total);
    let mut details = Vec::new();
    for (item, record) in resolved {
        let n = &record.nutrition;
        let q = item.quantity;
        total.serving_size_g += n.serving_size_g * q;
        total.calories_kcal += n.calories_kcal * q;
        total.protein_g += n.protein_g * q;
        total.fat_g += n.fat_g * q;
        total.carbs_g += n.carbs_g * q;
        total.sugar_g += n.sugar_g * q;
        total.sodium_mg += n.sodium_mg * q;
        total.fiber_g += n.fiber_g * q;
        details.push(json!({
            "product_name": item.name,
            "quantity": item.quantity,
        }));
    }
    let (status, message) = outcome(&missing);
    ToolResult::calc(
        status,
        &message,
        json!({
            "user_id": user_id,
            "total_nutrition": {
                "basis": "TOTAL",
                "serving_size_g": round6(total.serving_size_g),
                "calories_kcal": round6(total.calories_kcal),
                "protein_g": round6(total.protein_g),
                "fat_g": round6(total.fat_g),
                "carbs_g": round6(total.carbs_g),
                "sugar_g": round6(total.sugar_g),
                "sodium_mg": round6(total.sodium_mg),
                "fiber_g": round6(total.fiber_g),
            },
            "details": details,
        }),
    )
}
