//! Tool-engine regressions against frozen golden values, plus the
//! engine's algebraic and state invariants.

use std::path::PathBuf;

use egoharness_core::scenario::{load_database, snapshot, ScenarioDatabase};
use egoharness_core::tools::{execute, round2, ToolCall, ToolRegistry, ToolStatus};
use proptest::prelude::*;
use serde_json::json;

fn fixture(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(path)
}

fn retail_db() -> ScenarioDatabase {
    load_database(fixture("packs/retail_demo/database.json")).unwrap()
}

fn retail_registry() -> ToolRegistry {
    ToolRegistry::load_toolset_file(fixture("packs/retail_demo/tools.json")).unwrap()
}

fn call(tool: &str, params: serde_json::Value) -> ToolCall {
    ToolCall::new(tool, params)
}

#[test]
fn toolset_file_loads_twenty_tools() {
    let registry = retail_registry();
    assert_eq!(registry.len(), 20);
    // Raw docs are reused verbatim for the agent prompt.
    let docs = registry.schema_documents();
    assert!(docs.iter().any(|d| d["function"]["tool_name"] == "add_to_cart"));
}

#[test]
fn tax_regression_five_item_cart() {
    // Golden values: per-item tax amounts
    // 14.45 / 9.82 / 15.26 / 65.29 / 8.00 and total 112.82.
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call(
            "compute_total_tax",
            json!({"user_id": "bill_donk_143", "products": [
                {"product_name": "bourgogne pinot noir", "quantity": 2},
                {"product_name": "cava gran reserva", "quantity": 1},
                {"product_name": "brisa prosecco", "quantity": 2},
                {"product_name": "chateau zind-humbrecht", "quantity": 2},
                {"product_name": "chateau languedoc", "quantity": 1}
            ]}),
        ),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Success);
    let expected = [14.45, 9.82, 15.26, 65.29, 8.0];
    let details = result.payload["details"].as_array().unwrap();
    assert_eq!(details.len(), 5);
    for (detail, want) in details.iter().zip(expected) {
        let got = detail["tax_amount"].as_f64().unwrap();
        assert!((got - want).abs() <= 0.01, "tax {got} != {want}");
    }
    let total = result.payload["total_tax"].as_f64().unwrap();
    assert!((total - 112.82).abs() <= 0.01, "total {total}");
}

#[test]
fn payment_regression_with_unresolved_name() {
    // "Riunite" resolves nowhere at the exact tier; the total covers the
    // resolvable subset: 90 * 0.8 * 1 = 72.00.
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call(
            "compute_total_payment",
            json!({"user_id": "bill_donk_143", "products": [
                {"product_name": "Mouton Cadet", "quantity": 1},
                {"product_name": "Riunite", "quantity": 1}
            ]}),
        ),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::PartialSuccess);
    assert_eq!(result.payload["total"].as_f64().unwrap(), 72.0);
    assert!(result.message.contains("1 product(s) not found in catalog: riunite"));
    let details = result.payload["details"].as_array().unwrap();
    assert_eq!(details.len(), 1);
    assert_eq!(details[0]["subtotal"].as_f64().unwrap(), 72.0);
}

#[test]
fn payment_of_riunite_pair() {
    // 45 * 0.7 * 2 = 63.00 by hand.
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call(
            "compute_total_payment",
            json!({"user_id": "u", "products": [
                {"product_name": "riunite moscato", "quantity": 2}
            ]}),
        ),
        &registry,
    );
    assert_eq!(result.payload["total"].as_f64().unwrap(), 63.0);
}

#[test]
fn empty_item_list_totals_zero() {
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call("compute_total_payment", json!({"user_id": "u", "products": []})),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Success);
    assert_eq!(result.payload["total"].as_f64().unwrap(), 0.0);
}

#[test]
fn nutrition_regression_riunite() {
    let mut db = retail_db();
    let registry = retail_registry();
    let single = execute(
        &mut db,
        &call(
            "compute_total_nutrition",
            json!({"user_id": "u", "products": [
                {"product_name": "riunite moscato", "quantity": 1}
            ]}),
        ),
        &registry,
    );
    let n = &single.payload["total_nutrition"];
    assert_eq!(n["basis"], "TOTAL");
    assert_eq!(n["serving_size_g"].as_f64().unwrap(), 100.0);
    assert_eq!(n["calories_kcal"].as_f64().unwrap(), 120.0);
    assert_eq!(n["sugar_g"].as_f64().unwrap(), 10.0);
    assert_eq!(n["sodium_mg"].as_f64().unwrap(), 5.0);

    // Doubling the quantity doubles every component.
    let double = execute(
        &mut db,
        &call(
            "compute_total_nutrition",
            json!({"user_id": "u", "products": [
                {"product_name": "riunite moscato", "quantity": 2}
            ]}),
        ),
        &registry,
    );
    let d = &double.payload["total_nutrition"];
    for field in [
        "serving_size_g",
        "calories_kcal",
        "protein_g",
        "fat_g",
        "carbs_g",
        "sugar_g",
        "sodium_mg",
        "fiber_g",
    ] {
        assert_eq!(
            d[field].as_f64().unwrap(),
            2.0 * n[field].as_f64().unwrap(),
            "{field} must scale linearly"
        );
    }
}

#[test]
fn nutrition_regression_full_cart() {
    // The logged five-item aggregation: 593 kcal over a 700 g serving.
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call(
            "compute_total_nutrition",
            json!({"user_id": "grace_liu_999", "products": [
                {"product_name": "scaviango prosecco", "quantity": 2},
                {"product_name": "ferrarelle prosecco", "quantity": 2},
                {"product_name": "brasileiro prosecco", "quantity": 1},
                {"product_name": "heineken beer", "quantity": 1},
                {"product_name": "riunite moscato", "quantity": 1}
            ]}),
        ),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Success);
    let n = &result.payload["total_nutrition"];
    assert_eq!(n["serving_size_g"].as_f64().unwrap(), 700.0);
    assert_eq!(n["calories_kcal"].as_f64().unwrap(), 593.0);
    assert_eq!(n["protein_g"].as_f64().unwrap(), 2.5);
    assert_eq!(n["carbs_g"].as_f64().unwrap(), 36.4);
    assert_eq!(n["sugar_g"].as_f64().unwrap(), 18.5);
    assert_eq!(n["sodium_mg"].as_f64().unwrap(), 35.0);
}

#[test]
fn fractional_serving_count_is_rejected() {
    let mut db = retail_db();
    let registry = retail_registry();
    let before = snapshot(&db);
    let result = execute(
        &mut db,
        &call(
            "compute_total_nutrition",
            json!({"user_id": "u", "products": [
                {"product_name": "riunite moscato", "quantity": 1.5}
            ]}),
        ),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Error);
    assert_eq!(snapshot(&db), before);
}

#[test]
fn add_to_cart_message_and_storage() {
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call(
            "add_to_cart",
            json!({"user_id": "grace_liu_999", "product_name": "Riunite Moscato", "qty": 1,
                   "category": "wine", "price": 45, "tax_rate": 0.06, "discount": 0.7}),
        ),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Success);
    // The message echoes the caller's spelling; storage is normalized.
    assert_eq!(
        result.message,
        "Added 1 of 'Riunite Moscato' to user 'grace_liu_999' cart."
    );
    let cart = execute(
        &mut db,
        &call("get_cart", json!({"user_id": "grace_liu_999"})),
        &registry,
    );
    let items = cart.payload["cart_items"].as_array().unwrap();
    let riunite = items
        .iter()
        .find(|i| i["product_name"] == "riunite moscato")
        .unwrap();
    assert_eq!(riunite["quantity"].as_f64().unwrap(), 1.0);
    assert_eq!(riunite["price"].as_f64().unwrap(), 45.0);
    assert_eq!(riunite["discount"].as_f64().unwrap(), 0.7);
}

#[test]
fn unknown_user_cart_is_empty_success() {
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call("get_cart", json!({"user_id": "nobody_42"})),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Success);
    assert!(result.payload["cart_items"].as_array().unwrap().is_empty());
}

#[test]
fn fuzzy_read_resolves_partial_name() {
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call("get_price", json!({"product_name": "Riunite"})),
        &registry,
    );
    assert_eq!(result.payload["count"].as_i64().unwrap(), 1);
    assert_eq!(
        result.payload["products"][0]["product_name"],
        "riunite moscato"
    );
    assert_eq!(result.payload["products"][0]["price"].as_f64().unwrap(), 45.0);
}

#[test]
fn missing_required_parameter_is_an_error_without_mutation() {
    let mut db = retail_db();
    let registry = retail_registry();
    let before = snapshot(&db);
    let result = execute(
        &mut db,
        &call("add_to_cart", json!({"user_id": "u", "qty": 1})),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Error);
    assert!(result.message.contains("Missing required parameter"));
    assert_eq!(snapshot(&db), before);
}

#[test]
fn unknown_tool_is_an_error() {
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(&mut db, &call("teleport", json!({})), &registry);
    assert_eq!(result.status, ToolStatus::Error);
    assert!(result.message.contains("Unknown tool"));
}

#[test]
fn failed_writes_leave_digest_unchanged() {
    let mut db = retail_db();
    let registry = retail_registry();
    let before = snapshot(&db);
    // Remove more than the cart holds.
    let result = execute(
        &mut db,
        &call(
            "remove_from_cart",
            json!({"user_id": "grace_liu_999", "product_name": "heineken beer", "qty": 5}),
        ),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Error);
    // Delete a product that does not exist.
    let result = execute(
        &mut db,
        &call("delete_product", json!({"product_name": "phantom wine"})),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Error);
    // Nonpositive quantity violates the schema bound.
    let result = execute(
        &mut db,
        &call(
            "add_to_cart",
            json!({"user_id": "u", "product_name": "heineken beer", "qty": 0,
                   "category": "beer", "price": 60, "tax_rate": 0.09, "discount": 1.0}),
        ),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Error);
    assert_eq!(snapshot(&db), before);
}

#[test]
fn add_then_remove_restores_exact_digest() {
    let mut db = retail_db();
    let registry = retail_registry();
    let before = snapshot(&db);
    // Case 1: item absent before the add.
    execute(
        &mut db,
        &call(
            "add_to_cart",
            json!({"user_id": "grace_liu_999", "product_name": "mouton cadet", "qty": 2,
                   "category": "wine", "price": 90, "tax_rate": 0.06, "discount": 0.8}),
        ),
        &registry,
    );
    execute(
        &mut db,
        &call(
            "remove_from_cart",
            json!({"user_id": "grace_liu_999", "product_name": "mouton cadet", "qty": 2}),
        ),
        &registry,
    );
    assert_eq!(snapshot(&db), before);
    // Case 2: merging into an existing entry keeps its captured attributes,
    // so the inverse removal restores the exact prior state even when the
    // caller supplied different attributes.
    execute(
        &mut db,
        &call(
            "add_to_cart",
            json!({"user_id": "grace_liu_999", "product_name": "heineken beer", "qty": 3,
                   "category": "beer", "price": 999.0, "tax_rate": 0.5, "discount": 0.1}),
        ),
        &registry,
    );
    execute(
        &mut db,
        &call(
            "remove_from_cart",
            json!({"user_id": "grace_liu_999", "product_name": "heineken beer", "qty": 3}),
        ),
        &registry,
    );
    assert_eq!(snapshot(&db), before);
}

#[test]
fn calc_tools_never_resolve_fuzzily() {
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call(
            "compute_total_payment",
            json!({"user_id": "u", "products": [{"product_name": "riunite", "quantity": 1}]}),
        ),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::PartialSuccess);
    assert_eq!(result.payload["total"].as_f64().unwrap(), 0.0);
}

#[test]
fn tax_identity_pre_rounding() {
    // tax + net == price * discount * qty with net = amount / (1 + rate).
    let db = retail_db();
    for record in &db.catalog {
        for qty in [1.0, 2.0, 3.0] {
            let amount = record.price * record.discount * qty;
            let tax = amount * record.tax_rate / (1.0 + record.tax_rate);
            let net = amount / (1.0 + record.tax_rate);
            assert!(
                (tax + net - amount).abs() < 1e-9,
                "identity failed for {}",
                record.name
            );
        }
    }
}

#[test]
fn calculation_linearity_over_concatenation() {
    let mut db = retail_db();
    let registry = retail_registry();
    let part_a = json!([{"product_name": "riunite moscato", "quantity": 1},
                        {"product_name": "heineken beer", "quantity": 2}]);
    let part_b = json!([{"product_name": "mouton cadet", "quantity": 1}]);
    let whole = json!([{"product_name": "riunite moscato", "quantity": 1},
                       {"product_name": "heineken beer", "quantity": 2},
                       {"product_name": "mouton cadet", "quantity": 1}]);
    for tool in ["compute_total_payment", "compute_total_tax"] {
        let field = if tool == "compute_total_payment" { "total" } else { "total_tax" };
        let run = |db: &mut ScenarioDatabase, items: &serde_json::Value| {
            execute(
                db,
                &call(tool, json!({"user_id": "u", "products": items})),
                &registry,
            )
            .payload[field]
                .as_f64()
                .unwrap()
        };
        let a = run(&mut db, &part_a);
        let b = run(&mut db, &part_b);
        let w = run(&mut db, &whole);
        // Final rounding may shift each part by at most one cent.
        assert!(
            (a + b - w).abs() <= 0.02 + 1e-9,
            "{tool}: {a} + {b} vs {w}"
        );
    }
}

// Random read calls against the fixture database.
fn read_call_strategy() -> impl Strategy<Value = ToolCall> {
    let names = prop::sample::select(vec![
        "riunite moscato",
        "Riunite",
        "mouton",
        "heineken beer",
        "CHATEAU",
        "nothing like this",
    ]);
    let users = prop::sample::select(vec!["grace_liu_999", "bill_donk_143", "ghost_user"]);
    prop_oneof![
        names.clone().prop_map(|n| call("get_price", json!({"product_name": n}))),
        names.clone().prop_map(|n| call("get_nutrition", json!({"product_name": n}))),
        names.prop_map(|n| call("get_category", json!({"product_name": n}))),
        users.clone().prop_map(|u| call("get_cart", json!({"user_id": u}))),
        users.prop_map(|u| call("get_shopping_list", json!({"user_id": u}))),
        Just(call("list_discounted_products", json!({}))),
        (1u32..400, 1u32..400).prop_map(|(a, b)| call(
            "find_products_by_price_range",
            json!({"min_price": a.min(b), "max_price": a.max(b)})
        )),
    ]
}

// Random write calls; some succeed, some fail, both must stay deterministic.
fn write_call_strategy() -> impl Strategy<Value = ToolCall> {
    let names = prop::sample::select(vec![
        "riunite moscato",
        "heineken beer",
        "mouton cadet",
        "unknown bottle",
    ]);
    let users = prop::sample::select(vec!["grace_liu_999", "bill_sue_119"]);
    prop_oneof![
        (users.clone(), names.clone(), 1u32..4).prop_map(|(u, n, q)| call(
            "add_to_cart",
            json!({"user_id": u, "product_name": n, "qty": q,
                   "category": "wine", "price": 45, "tax_rate": 0.06, "discount": 0.7})
        )),
        (users.clone(), names.clone(), 1u32..4).prop_map(|(u, n, q)| call(
            "remove_from_cart",
            json!({"user_id": u, "product_name": n, "qty": q})
        )),
        users.clone().prop_map(|u| call("clear_cart", json!({"user_id": u}))),
        (users, names).prop_map(|(u, n)| call(
            "add_to_shopping_list",
            json!({"user_id": u, "product_name": n, "quantity": 1})
        )),
    ]
}

proptest! {
    #[test]
    fn read_tools_never_mutate(calls in prop::collection::vec(read_call_strategy(), 1..12)) {
        let mut db = retail_db();
        let registry = retail_registry();
        let before = snapshot(&db);
        for c in &calls {
            execute(&mut db, c, &registry);
        }
        prop_assert_eq!(snapshot(&db), before);
    }

    #[test]
    fn replaying_a_sequence_gives_equal_digests(
        calls in prop::collection::vec(write_call_strategy(), 0..16)
    ) {
        let registry = retail_registry();
        let mut a = retail_db();
        let mut b = retail_db();
        for c in &calls {
            execute(&mut a, c, &registry);
        }
        for c in &calls {
            execute(&mut b, c, &registry);
        }
        prop_assert_eq!(snapshot(&a), snapshot(&b));
    }

    #[test]
    fn reset_after_mutation_restores_digest(
        calls in prop::collection::vec(write_call_strategy(), 0..10)
    ) {
        let registry = retail_registry();
        let pristine = retail_db();
        let mut db = pristine.clone();
        for c in &calls {
            execute(&mut db, c, &registry);
        }
        egoharness_core::scenario::reset(&mut db, &pristine).unwrap();
        prop_assert_eq!(snapshot(&db), snapshot(&pristine));
    }
}

#[test]
fn round2_matches_reference_values() {
    assert_eq!(round2(175.0 * 0.09 / 1.09), 14.45);
    assert_eq!(round2(108.0 * 0.1 / 1.1), 9.82);
    assert_eq!(round2(154.0 * 0.11 / 1.11), 15.26);
    assert_eq!(round2(718.2 * 0.1 / 1.1), 65.29);
    assert_eq!(round2(88.0 * 0.1 / 1.1), 8.0);
}

#[test]
fn empty_nutrition_list_is_all_zero_total() {
    let mut db = retail_db();
    let registry = retail_registry();
    let result = execute(
        &mut db,
        &call("compute_total_nutrition", json!({"user_id": "u", "products": []})),
        &registry,
    );
    assert_eq!(result.status, ToolStatus::Success);
    let n = &result.payload["total_nutrition"];
    assert_eq!(n["basis"], "TOTAL");
    for field in [
        "serving_size_g",
        "calories_kcal",
        "protein_g",
        "fat_g",
        "carbs_g",
        "sugar_g",
        "sodium_mg",
        "fiber_g",
    ] {
        assert_eq!(n[field].as_f64().unwrap(), 0.0, "{field}");
    }
}
