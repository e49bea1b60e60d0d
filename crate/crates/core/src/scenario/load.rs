//! Scenario document parsing.
//!
//! One JSON document per scenario. Recognized top-level keys are the catalog
//! collections (`products`, `dishes`, `recipes`, `ingredients`), the ledger
//! collections (`user_carts`, `user_orders`, `user_shopping_lists`,
//! `user_menus`), and an optional `scenario_id`. Unknown top-level keys are
//! rejected; unknown keys inside a catalog record are preserved in `extra`.

use std::path::Path;

use serde_json::Value;

use super::{
    normalize_name, CatalogCollection, CatalogRecord, LedgerItem, LedgerKind, NutritionBasis,
    NutritionFacts, PricedAttrs, ScenarioDatabase, ScenarioError, UserLedger,
};

/// Loads, normalizes, and validates a scenario database from a file.
///
/// The scenario id defaults to the file stem when the document does not
/// carry one. Dangling ledger references are not an error; query them with
/// [`ScenarioDatabase::dangling_references`].
pub fn load_database(path: impl AsRef<Path>) -> Result<ScenarioDatabase, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let fallback_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "scenario".to_string());
    parse_database(&text, &fallback_id)
}

/// Parses a scenario document from a JSON string.
pub fn parse_database(text: &str, fallback_id: &str) -> Result<ScenarioDatabase, ScenarioError> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc
        .as_object()
        .ok_or_else(|| ScenarioError::Schema("scenario document must be a JSON object".into()))?;

    let mut db = ScenarioDatabase::empty(fallback_id);
    for (key, value) in obj {
        if key == "scenario_id" {
            let id = value.as_str().ok_or_else(|| {
                ScenarioError::Schema("'scenario_id' must be a string".into())
            })?;
            db.scenario_id = id.to_string();
        } else if let Some(collection) = CatalogCollection::from_key(key) {
            let records = value.as_array().ok_or_else(|| {
                ScenarioError::Schema(format!("'{key}' must be an array of records"))
            })?;
            for record in records {
                db.catalog.push(parse_catalog_record(collection, record)?);
            }
        } else if let Some(kind) = LedgerKind::from_key(key) {
            let ledgers = value.as_array().ok_or_else(|| {
                ScenarioError::Schema(format!("'{key}' must be an array of user ledgers"))
            })?;
            let parsed: Result<Vec<_>, _> =
                ledgers.iter().map(|l| parse_ledger(kind, l)).collect();
            db.ledgers.insert(kind, parsed?);
        } else {
            return Err(ScenarioError::Schema(format!(
                "unknown top-level key '{key}' in scenario document"
            )));
        }
    }
    db.prune_empty_ledgers();
    db.validate()?;
    Ok(db)
}

fn required_str(obj: &serde_json::Map<String, Value>, field: &str) -> Result<String, ScenarioError> {
    match obj.get(field) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(ScenarioError::Schema(format!(
            "field '{field}' must be a string"
        ))),
        None => Err(ScenarioError::Schema(format!("missing field '{field}'"))),
    }
}

fn number(value: &Value, field: &str) -> Result<f64, ScenarioError> {
    value
        .as_f64()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ScenarioError::Schema(format!("field '{field}' must be a finite number")))
}

fn optional_number(
    obj: &serde_json::Map<String, Value>,
    field: &str,
    default: f64,
) -> Result<f64, ScenarioError> {
    match obj.get(field) {
        Some(v) => number(v, field),
        None => Ok(default),
    }
}

fn string_list(value: &Value, field: &str) -> Result<Vec<String>, ScenarioError> {
    let arr = value
        .as_array()
        .ok_or_else(|| ScenarioError::Schema(format!("field '{field}' must be an array")))?;
    arr.iter()
        .map(|v| {
            v.as_str().map(normalize_name).ok_or_else(|| {
                ScenarioError::Schema(format!("field '{field}' must contain strings"))
            })
        })
        .collect()
}

const RECORD_KEYS: [&str; 10] = [
    "name",
    "category",
    "price",
    "tax_rate",
    "discount",
    "taste",
    "nutritional_characteristics",
    "country_of_origin",
    "allergens",
    "nutrition",
];

fn parse_catalog_record(
    collection: CatalogCollection,
    value: &Value,
) -> Result<CatalogRecord, ScenarioError> {
    let obj = value.as_object().ok_or_else(|| {
        ScenarioError::Schema(format!("{} records must be objects", collection.key()))
    })?;
    let name = normalize_name(&required_str(obj, "name")?);
    let category = obj
        .get("category")
        .and_then(|v| v.as_str())
        .map(normalize_name)
        .unwrap_or_default();
    let price = optional_number(obj, "price", 0.0)?;
    let tax_rate = optional_number(obj, "tax_rate", 0.0)?;
    let discount = optional_number(obj, "discount", 1.0)?;
    let taste = match obj.get("taste") {
        Some(v) => string_list(v, "taste")?,
        None => Vec::new(),
    };
    let characteristics = match obj.get("nutritional_characteristics") {
        Some(v) => string_list(v, "nutritional_characteristics")?,
        None => Vec::new(),
    };
    let allergens = match obj.get("allergens") {
        Some(v) => string_list(v, "allergens")?,
        None => Vec::new(),
    };
    let country = match obj.get("country_of_origin") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(Value::Null) | None => None,
        Some(_) => {
            return Err(ScenarioError::Schema(
                "field 'country_of_origin' must be a string".into(),
            ))
        }
    };
    let nutrition = match obj.get("nutrition") {
        Some(v) => parse_nutrition(v)?,
        None => NutritionFacts::default_per_100g(),
    };
    let mut extra = serde_json::Map::new();
    for (key, value) in obj {
        if !RECORD_KEYS.contains(&key.as_str()) {
            extra.insert(key.clone(), value.clone());
        }
    }
    Ok(CatalogRecord {
        collection,
        name,
        category,
        price,
        tax_rate,
        discount,
        taste,
        nutritional_characteristics: characteristics,
        country_of_origin: country,
        allergens,
        nutrition,
        extra,
    })
}

fn parse_nutrition(value: &Value) -> Result<NutritionFacts, ScenarioError> {
    let obj = value
        .as_object()
        .ok_or_else(|| ScenarioError::Schema("'nutrition' must be an object".into()))?;
    let basis = match obj.get("basis").and_then(|v| v.as_str()) {
        Some("PER_100G") | None => NutritionBasis::Per100g,
        Some("TOTAL") => NutritionBasis::Total,
        Some(other) => {
            return Err(ScenarioError::Schema(format!(
                "unknown nutrition basis '{other}'"
            )))
        }
    };
    Ok(NutritionFacts {
        basis,
        serving_size_g: optional_number(obj, "serving_size_g", 100.0)?,
        calories_kcal: optional_number(obj, "calories_kcal", 0.0)?,
        protein_g: optional_number(obj, "protein_g", 0.0)?,
        fat_g: optional_number(obj, "fat_g", 0.0)?,
        carbs_g: optional_number(obj, "carbs_g", 0.0)?,
        sugar_g: optional_number(obj, "sugar_g", 0.0)?,
        sodium_mg: optional_number(obj, "sodium_mg", 0.0)?,
        fiber_g: optional_number(obj, "fiber_g", 0.0)?,
    })
}

/// Accepted item-name keys, in lookup order. Scenario families name the same
/// concept differently (products vs dishes vs ingredients).
const ITEM_NAME_KEYS: [&str; 6] = [
    "product_name",
    "dish_name",
    "recipe_name",
    "ingredient_name",
    "item_name",
    "name",
];

fn parse_ledger(kind: LedgerKind, value: &Value) -> Result<UserLedger, ScenarioError> {
    let obj = value
        .as_object()
        .ok_or_else(|| ScenarioError::Schema(format!("{} entries must be objects", kind.key())))?;
    let user_id = required_str(obj, "user_id")?;
    let mut items = Vec::new();

    // Menus may list recipe names directly: {"user_id": ..., "recipes": [...]}.
    if kind == LedgerKind::Menu {
        if let Some(Value::Array(names)) = obj.get("recipes") {
            for name in names {
                let name = name.as_str().ok_or_else(|| {
                    ScenarioError::Schema("'recipes' must contain strings".into())
                })?;
                items.push(LedgerItem {
                    name: normalize_name(name),
                    quantity: 1.0,
                    priced: None,
                });
            }
            return Ok(UserLedger { user_id, items });
        }
    }

    let raw_items = obj
        .get("items")
        .and_then(|v| v.as_array())
        .ok_or_else(|| {
            ScenarioError::Schema(format!(
                "{} entry for '{user_id}' must carry an 'items' array",
                kind.key()
            ))
        })?;
    for raw in raw_items {
        let item = raw.as_object().ok_or_else(|| {
            ScenarioError::Schema(format!("{} items must be objects", kind.key()))
        })?;
        let name = ITEM_NAME_KEYS
            .iter()
            .find_map(|key| item.get(*key).and_then(|v| v.as_str()))
            .map(normalize_name)
            .ok_or_else(|| {
                ScenarioError::Schema(format!(
                    "{} item for '{user_id}' is missing an item name",
                    kind.key()
                ))
            })?;
        let quantity = optional_number(item, "quantity", 1.0)?;
        let priced = if item.contains_key("price") {
            Some(PricedAttrs {
                category: item
                    .get("category")
                    .and_then(|v| v.as_str())
                    .map(normalize_name)
                    .unwrap_or_default(),
                price: optional_number(item, "price", 0.0)?,
                tax_rate: optional_number(item, "tax_rate", 0.0)?,
                discount: optional_number(item, "discount", 1.0)?,
            })
        } else {
            None
        };
        items.push(LedgerItem {
            name,
            quantity,
            priced,
        });
    }
    Ok(UserLedger { user_id, items })
}
