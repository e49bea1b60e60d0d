//! Tool call execution against a scenario database.

use serde_json::json;

use crate::scenario::{
    normalize_name, CatalogCollection, CatalogRecord, LedgerItem, LedgerKind, PricedAttrs,
    ScenarioDatabase,
};

use super::{calc, fuzzy_match, ParamType, ToolCall, ToolRegistry, ToolResult, ToolSchema};

/// Executes one well-formed call against the database.
///
/// Unknown tools, missing required parameters, and constraint violations all
/// yield an error result and leave the database untouched; write tools
/// validate everything before mutating.
pub fn execute(db: &mut ScenarioDatabase, call: &ToolCall, registry: &ToolRegistry) -> ToolResult {
    let schema = match registry.resolve(&call.tool_name) {
        Some(schema) => schema.clone(),
        None => return ToolResult::error(&format!("Unknown tool: {}", call.tool_name)),
    };
    if let Err(result) = check_parameters(&schema, call) {
        return result;
    }
    dispatch(db, &schema.tool_name, call)
}

fn check_parameters(schema: &ToolSchema, call: &ToolCall) -> Result<(), ToolResult> {
    for param in &schema.parameters {
        let value = match call.parameters.get(&param.name) {
            Some(value) => value,
            None => {
                // Calculators accept scenario-flavored aliases for the item
                // list ("items", "dishes").
                if param.name == "products"
                    && ["items", "dishes"]
                        .iter()
                        .any(|k| call.parameters.contains_key(*k))
                {
                    continue;
                }
                if param.required {
                    return Err(ToolResult::error(&format!(
                        "Missing required parameter: '{}'",
                        param.name
                    )));
                }
                continue;
            }
        };
        let type_ok = match param.param_type {
            ParamType::String => value.is_string(),
            ParamType::Number | ParamType::Integer => value.is_number(),
            ParamType::Array => value.is_array(),
            ParamType::Object => value.is_object(),
            ParamType::Boolean => value.is_boolean(),
        };
        if !type_ok {
            return Err(ToolResult::error(&format!(
                "Parameter '{}' has the wrong type",
                param.name
            )));
        }
        if let Some(n) = value.as_f64() {
            if let Some(bound) = param.exclusive_min {
                if n <= bound {
                    return Err(ToolResult::error(&format!(
                        "Parameter '{}' must be greater than {bound}",
                        param.name
                    )));
                }
            }
            if let Some(bound) = param.min {
                if n < bound {
                    return Err(ToolResult::error(&format!(
                        "Parameter '{}' must be at least {bound}",
                        param.name
                    )));
                }
            }
            if let Some(bound) = param.max {
                if n > bound {
                    return Err(ToolResult::error(&format!(
                        "Parameter '{}' must be at most {bound}",
                        param.name
                    )));
                }
            }
        }
    }
    Ok(())
}

fn dispatch(db: &mut ScenarioDatabase, tool: &str, call: &ToolCall) -> ToolResult {
    match tool {
        "get_price" => field_lookup(db, call, "price"),
        "get_tax_rate" => field_lookup(db, call, "tax_rate"),
        "get_category" => field_lookup(db, call, "category"),
        "get_discount" => field_lookup(db, call, "discount"),
        "get_nutrition" => field_lookup(db, call, "nutrition"),
        "get_cart" => get_cart(db, call),
        "get_shopping_list" | "get_current_shopping_list" => get_shopping_list(db, call),
        "get_current_menu" => get_current_menu(db, call),
        "get_all_recipe_names" => {
            ToolResult::read_ok(json!({
                "recipe_names": db.catalog_names(Some(CatalogCollection::Recipes)),
            }))
        }
        "get_all_ingredient_names" => {
            ToolResult::read_ok(json!({
                "ingredient_names": db.catalog_names(Some(CatalogCollection::Ingredients)),
            }))
        }
        "find_recipes_by_ingredient" => find_recipes_by_ingredient(db, call),
        "get_recipe_ingredients" => get_recipe_ingredients(db, call),
        "find_products_by_taste" => {
            let taste = normalize_name(call.str_param("taste").unwrap_or_default());
            filter_names(db, |r| r.taste.contains(&taste))
        }
        "find_products_by_nutritional_characteristic" => {
            let wanted = normalize_name(call.str_param("characteristic").unwrap_or_default());
            filter_names(db, |r| {
                r.nutritional_characteristics.contains(&wanted)
            })
        }
        "find_products_by_country_of_origin" => {
            let wanted = normalize_name(call.str_param("country").unwrap_or_default());
            filter_names(db, |r| {
                r.country_of_origin
                    .as_deref()
                    .map(normalize_name)
                    .is_some_and(|c| c == wanted)
            })
        }
        "find_products_by_price_range" => {
            let min = call.num_param("min_price").unwrap_or(f64::NEG_INFINITY);
            let max = call.num_param("max_price").unwrap_or(f64::INFINITY);
            filter_names(db, |r| r.price >= min && r.price <= max)
        }
        "list_discounted_products" => filter_names(db, |r| r.discount < 1.0),
        "add_product" => add_product(db, call),
        "delete_product" => delete_product(db, call),
        "add_to_cart" => add_item(db, call, LedgerKind::Cart),
        "remove_from_cart" => remove_item(db, call, LedgerKind::Cart),
        "clear_cart" => clear_cart(db, call),
        "add_to_shopping_list" => add_item(db, call, LedgerKind::ShoppingList),
        "remove_from_shopping_list" => remove_item(db, call, LedgerKind::ShoppingList),
        "add_recipe_to_menu" => add_recipe_to_menu(db, call),
        "remove_recipe_from_menu" => remove_recipe_from_menu(db, call),
        "compute_total_payment" => calc::compute_total_payment(db, call),
        "compute_total_tax" => calc::compute_total_tax(db, call),
        "compute_total_nutrition" => calc::compute_total_nutrition(db, call),
        other => ToolResult::error(&format!("Unknown tool: {other}")),
    }
}

/// Renders a quantity the way the logs do: integral values without a
/// fractional part.
fn show_qty(q: f64) -> String {
    if q.fract() == 0.0 {
        format!("{}", q as i64)
    } else {
        format!("{q}")
    }
}

// --- Read tools ---

fn name_param(call: &ToolCall) -> Option<&str> {
    ["product_name", "dish_name", "ingredient_name", "recipe_name", "name"]
        .iter()
        .find_map(|key| call.str_param(key))
}

fn field_lookup(db: &ScenarioDatabase, call: &ToolCall, field: &str) -> ToolResult {
    let query = name_param(call).unwrap_or_default();
    let set = fuzzy_match(query, &db.catalog_names(None));
    let mut products = Vec::new();
    for name in &set.matches {
        let record = db.catalog_record(name).expect("matched name is in catalog");
        let value = match field {
            "price" => json!(record.price),
            "tax_rate" => json!(record.tax_rate),
            "category" => json!(record.category),
            "discount" => json!(record.discount),
            "nutrition" => serde_json::to_value(&record.nutrition).unwrap_or(json!(null)),
            _ => json!(null),
        };
        products.push(json!({
            "product_name": name,
            field: value,
        }));
    }
    ToolResult::read_ok(json!({
        "products": products,
        "count": set.matches.len(),
    }))
}

fn filter_names<F: Fn(&CatalogRecord) -> bool>(db: &ScenarioDatabase, keep: F) -> ToolResult {
    let names: Vec<String> = db
        .catalog
        .iter()
        .filter(|r| keep(r))
        .map(|r| r.name.clone())
        .collect();
    ToolResult::read_ok(json!({ "product_names": names }))
}

fn ledger_items_json(db: &ScenarioDatabase, kind: LedgerKind, user_id: &str) -> Vec<serde_json::Value> {
    db.ledger(kind, user_id)
        .map(|ledger| {
            ledger
                .items
                .iter()
                .map(|item| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("product_name".into(), item.name.clone().into());
                    obj.insert("quantity".into(), json!(item.quantity));
                    if let Some(p) = &item.priced {
                        obj.insert("category".into(), p.category.clone().into());
                        obj.insert("price".into(), json!(p.price));
                        obj.insert("tax_rate".into(), json!(p.tax_rate));
                        obj.insert("discount".into(), json!(p.discount));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect()
        })
        .unwrap_or_default()
}

fn get_cart(db: &ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let user_id = call.str_param("user_id").unwrap_or_default();
    ToolResult::read_ok(json!({
        "cart_items": ledger_items_json(db, LedgerKind::Cart, user_id),
    }))
}

fn get_shopping_list(db: &ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let user_id = call.str_param("user_id").unwrap_or_default();
    ToolResult::read_ok(json!({
        "shopping_list_items": ledger_items_json(db, LedgerKind::ShoppingList, user_id),
    }))
}

fn menu_names(db: &ScenarioDatabase, user_id: &str) -> Vec<String> {
    db.ledger(LedgerKind::Menu, user_id)
        .map(|l| l.items.iter().map(|i| i.name.clone()).collect())
        .unwrap_or_default()
}

fn get_current_menu(db: &ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let user_id = call.str_param("user_id").unwrap_or_default();
    ToolResult::read_ok(json!({ "menu": menu_names(db, user_id) }))
}

fn record_ingredients(record: &CatalogRecord) -> Vec<String> {
    record
        .extra
        .get("ingredients")
        .and_then(|v| v.as_array())
        .map(|arr| {
            arr.iter()
                .filter_map(|v| match v {
                    serde_json::Value::String(s) => Some(normalize_name(s)),
                    serde_json::Value::Object(o) => o
                        .get("name")
                        .or_else(|| o.get("ingredient_name"))
                        .and_then(|n| n.as_str())
                        .map(normalize_name),
                    _ => None,
                })
                .collect()
        })
        .unwrap_or_default()
}

fn find_recipes_by_ingredient(db: &ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let query = call.str_param("ingredient_name").unwrap_or_default();
    let mut names = Vec::new();
    for record in db
        .catalog
        .iter()
        .filter(|r| r.collection == CatalogCollection::Recipes)
    {
        let ingredients = record_ingredients(record);
        if fuzzy_match(query, &ingredients).is_match() {
            names.push(record.name.clone());
        }
    }
    ToolResult::read_ok(json!({ "recipe_names": names }))
}

fn get_recipe_ingredients(db: &ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let query = call.str_param("recipe_name").unwrap_or_default();
    let candidates = db.catalog_names(Some(CatalogCollection::Recipes));
    let set = fuzzy_match(query, &candidates);
    let recipes: Vec<serde_json::Value> = set
        .matches
        .iter()
        .filter_map(|name| db.catalog_record(name))
        .map(|record| {
            json!({
                "recipe_name": record.name,
                "ingredients": record_ingredients(record),
            })
        })
        .collect();
    ToolResult::read_ok(json!({
        "recipes": recipes,
        "count": recipes.len(),
    }))
}

// --- Write tools ---

fn add_product(db: &mut ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let name = normalize_name(call.str_param("name").unwrap_or_default());
    if name.is_empty() {
        return ToolResult::error("Parameter 'name' must be a non-empty string");
    }
    if db.catalog_record(&name).is_some() {
        return ToolResult::error(&format!("Product '{name}' already exists in catalog"));
    }
    let mut record = CatalogRecord::new(
        CatalogCollection::Products,
        &name,
        &normalize_name(call.str_param("category").unwrap_or_default()),
        call.num_param("price").unwrap_or(0.0),
        call.num_param("tax_rate").unwrap_or(0.0),
        call.num_param("discount").unwrap_or(1.0),
    );
    for (field, target) in [
        ("taste", &mut record.taste),
        ("nutritional_characteristics", &mut record.nutritional_characteristics),
        ("allergens", &mut record.allergens),
    ] {
        if let Some(values) = call.parameters.get(field).and_then(|v| v.as_array()) {
            *target = values
                .iter()
                .filter_map(|v| v.as_str().map(normalize_name))
                .collect();
        }
    }
    if let Some(country) = call.str_param("country_of_origin") {
        record.country_of_origin = Some(country.to_string());
    }
    db.catalog.push(record);
    ToolResult::write_ok(
        &format!("Product '{name}' added to catalog."),
        json!({}),
    )
}

fn delete_product(db: &mut ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let name = normalize_name(name_param(call).unwrap_or_default());
    match db.catalog.iter().position(|r| r.name == name) {
        Some(pos) => {
            db.catalog.remove(pos);
            ToolResult::write_ok(&format!("Product '{name}' deleted from catalog."), json!({}))
        }
        None => ToolResult::error(&format!("Product '{name}' not found in catalog")),
    }
}

fn ledger_noun(kind: LedgerKind) -> &'static str {
    match kind {
        LedgerKind::Cart => "cart",
        LedgerKind::Order => "order",
        LedgerKind::ShoppingList => "shopping list",
        LedgerKind::Menu => "menu",
    }
}

fn add_item(db: &mut ScenarioDatabase, call: &ToolCall, kind: LedgerKind) -> ToolResult {
    let user_id = call.str_param("user_id").unwrap_or_default().to_string();
    let raw_name = name_param(call).unwrap_or_default().to_string();
    let name = normalize_name(&raw_name);
    if name.is_empty() {
        return ToolResult::error("Parameter 'product_name' must be a non-empty string");
    }
    let qty = call
        .num_param("qty")
        .or_else(|| call.num_param("quantity"))
        .unwrap_or(1.0);
    let priced = if kind == LedgerKind::Cart {
        Some(PricedAttrs {
            category: normalize_name(call.str_param("category").unwrap_or_default()),
            price: call.num_param("price").unwrap_or(0.0),
            tax_rate: call.num_param("tax_rate").unwrap_or(0.0),
            discount: call.num_param("discount").unwrap_or(1.0),
        })
    } else {
        None
    };
    let ledger = db.ledger_mut(kind, &user_id);
    match ledger.item_mut(&name) {
        // An entry that is already present keeps its captured attributes;
        // only the quantity grows. This keeps add-then-remove an identity
        // on the state digest.
        Some(item) => item.quantity += qty,
        None => ledger.items.push(LedgerItem {
            name: name.clone(),
            quantity: qty,
            priced,
        }),
    }
    ToolResult::write_ok(
        &format!(
            "Added {} of '{raw_name}' to user '{user_id}' {}.",
            show_qty(qty),
            ledger_noun(kind)
        ),
        json!({}),
    )
}

fn remove_item(db: &mut ScenarioDatabase, call: &ToolCall, kind: LedgerKind) -> ToolResult {
    let user_id = call.str_param("user_id").unwrap_or_default().to_string();
    let raw_name = name_param(call).unwrap_or_default().to_string();
    let name = normalize_name(&raw_name);
    let requested = call.num_param("qty").or_else(|| call.num_param("quantity"));
    let noun = ledger_noun(kind);

    let Some(ledger) = db
        .ledgers
        .get_mut(&kind)
        .and_then(|l| l.iter_mut().find(|u| u.user_id == user_id))
    else {
        return ToolResult::error(&format!(
            "Item '{name}' not found in {noun} for user '{user_id}'"
        ));
    };
    let Some(pos) = ledger.items.iter().position(|i| i.name == name) else {
        return ToolResult::error(&format!(
            "Item '{name}' not found in {noun} for user '{user_id}'"
        ));
    };
    let have = ledger.items[pos].quantity;
    let qty = requested.unwrap_or(have);
    if qty > have {
        return ToolResult::error(&format!(
            "Cannot remove {} of '{name}': only {} in {noun}",
            show_qty(qty),
            show_qty(have)
        ));
    }
    if qty == have {
        ledger.items.remove(pos);
    } else {
        ledger.items[pos].quantity -= qty;
    }
    db.prune_empty_ledgers();
    ToolResult::write_ok(
        &format!(
            "Removed {} of '{raw_name}' from user '{user_id}' {noun}.",
            show_qty(qty)
        ),
        json!({}),
    )
}

fn clear_cart(db: &mut ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let user_id = call.str_param("user_id").unwrap_or_default().to_string();
    if let Some(ledgers) = db.ledgers.get_mut(&LedgerKind::Cart) {
        ledgers.retain(|l| l.user_id != user_id);
    }
    db.prune_empty_ledgers();
    ToolResult::write_ok(&format!("Cleared cart for user '{user_id}'."), json!({}))
}

fn add_recipe_to_menu(db: &mut ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let user_id = call.str_param("user_id").unwrap_or_default().to_string();
    let raw_name = call.str_param("recipe_name").unwrap_or_default().to_string();
    let name = normalize_name(&raw_name);
    if name.is_empty() {
        return ToolResult::error("Parameter 'recipe_name' must be a non-empty string");
    }
    let ledger = db.ledger_mut(LedgerKind::Menu, &user_id);
    match ledger.item_mut(&name) {
        Some(item) => item.quantity += 1.0,
        None => ledger.items.push(LedgerItem {
            name: name.clone(),
            quantity: 1.0,
            priced: None,
        }),
    }
    let menu = menu_names(db, &user_id);
    ToolResult::write_ok(
        &format!("Recipe '{raw_name}' added to menu."),
        json!({ "menu": menu }),
    )
}

fn remove_recipe_from_menu(db: &mut ScenarioDatabase, call: &ToolCall) -> ToolResult {
    let user_id = call.str_param("user_id").unwrap_or_default().to_string();
    let name = normalize_name(call.str_param("recipe_name").unwrap_or_default());
    let Some(ledger) = db
        .ledgers
        .get_mut(&LedgerKind::Menu)
        .and_then(|l| l.iter_mut().find(|u| u.user_id == user_id))
    else {
        return ToolResult::error(&format!("Recipe '{name}' not found in menu"));
    };
    let Some(pos) = ledger.items.iter().position(|i| i.name == name) else {
        return ToolResult::error(&format!("Recipe '{name}' not found in menu"));
    };
    if ledger.items[pos].quantity > 1.0 {
        ledger.items[pos].quantity -= 1.0;
    } else {
        ledger.items.remove(pos);
    }
    db.prune_empty_ledgers();
    let menu = menu_names(db, &user_id);
    ToolResult::write_ok(
        &format!("Recipe '{name}' removed from menu."),
        json!({ "menu": menu }),
    )
}
