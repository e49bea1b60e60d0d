//! Scenario database: the mutable world state behind every episode.
//!
//! A scenario is one JSON document holding catalog collections (products,
//! dishes, recipes, ingredients) and per-user ledgers (carts, orders,
//! shopping lists, menus). The module loads and validates these documents,
//! mutates them through the tool engine, and produces canonical state
//! digests so that two databases can be compared for equivalence regardless
//! of key ordering, item insertion order, or numeric formatting.

mod digest;
mod load;

pub use digest::{canonical_bytes, snapshot, states_equivalent, StateDigest};
pub use load::{load_database, parse_database};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while loading, validating, or comparing scenario databases.
#[derive(Debug, Error)]
pub enum ScenarioError {
    /// A field is missing or has the wrong type in the scenario document.
    #[error("schema error: {0}")]
    Schema(String),
    /// A value violates a database invariant (duplicate name, bad range).
    #[error("integrity error: {0}")]
    Integrity(String),
    /// Two databases from different scenarios were compared or reset.
    #[error("scenario mismatch: expected '{expected}', got '{actual}'")]
    ScenarioMismatch { expected: String, actual: String },
    #[error("io error reading scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Lowercases, trims, and collapses internal whitespace runs to one space.
///
/// All record and item names are stored in this form; digest canonicalization
/// and exact-tier matching both rely on it.
pub fn normalize_name(s: &str) -> String {
    let lowered = s.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    let mut last_space = true;
    for ch in lowered.trim().chars() {
        if ch.is_whitespace() {
            if !last_space {
                out.push(' ');
            }
            last_space = true;
        } else {
            out.push(ch);
            last_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Which top-level catalog collection a record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogCollection {
    Products,
    Dishes,
    Recipes,
    Ingredients,
}

impl CatalogCollection {
    pub const ALL: [CatalogCollection; 4] = [
        CatalogCollection::Products,
        CatalogCollection::Dishes,
        CatalogCollection::Recipes,
        CatalogCollection::Ingredients,
    ];

    pub fn key(self) -> &'static str {
        match self {
            CatalogCollection::Products => "products",
            CatalogCollection::Dishes => "dishes",
            CatalogCollection::Recipes => "recipes",
            CatalogCollection::Ingredients => "ingredients",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        match key {
            "products" => Some(CatalogCollection::Products),
            "dishes" => Some(CatalogCollection::Dishes),
            "recipes" => Some(CatalogCollection::Recipes),
            "ingredients" => Some(CatalogCollection::Ingredients),
            _ => None,
        }
    }
}

/// The four per-user ledger families a scenario can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerKind {
    Cart,
    Order,
    ShoppingList,
    Menu,
}

impl LedgerKind {
    pub const ALL: [LedgerKind; 4] = [
        LedgerKind::Cart,
        LedgerKind::Order,
        LedgerKind::ShoppingList,
        LedgerKind::Menu,
    ];

    /// Top-level key in the scenario document.
    pub fn key(self) -> &'static str {
        match self {
            LedgerKind::Cart => "user_carts",
            LedgerKind::Order => "user_orders",
            LedgerKind::ShoppingList => "user_shopping_lists",
            LedgerKind::Menu => "user_menus",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        match key {
            "user_carts" => Some(LedgerKind::Cart),
            "user_orders" => Some(LedgerKind::Order),
            "user_shopping_lists" => Some(LedgerKind::ShoppingList),
            "user_menus" => Some(LedgerKind::Menu),
            _ => None,
        }
    }
}

/// How nutrition components are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NutritionBasis {
    #[serde(rename = "PER_100G")]
    Per100g,
    #[serde(rename = "TOTAL")]
    Total,
}

/// Nutrition facts for one catalog record or one aggregated total.
///
/// Catalog records always store `PER_100G` facts; `TOTAL` facts are only
/// produced by the nutrition calculator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NutritionFacts {
    pub basis: NutritionBasis,
    pub serving_size_g: f64,
    pub calories_kcal: f64,
    pub protein_g: f64,
    pub fat_g: f64,
    pub carbs_g: f64,
    pub sugar_g: f64,
    pub sodium_mg: f64,
    pub fiber_g: f64,
}

impl NutritionFacts {
    /// Zeroed facts on the given basis.
    pub fn zero(basis: NutritionBasis) -> Self {
        NutritionFacts {
            basis,
            serving_size_g: 0.0,
            calories_kcal: 0.0,
            protein_g: 0.0,
            fat_g: 0.0,
            carbs_g: 0.0,
            sugar_g: 0.0,
            sodium_mg: 0.0,
            fiber_g: 0.0,
        }
    }

    /// Default facts for records that omit nutrition: per-100g, all zero,
    /// 100 g serving.
    pub fn default_per_100g() -> Self {
        NutritionFacts {
            serving_size_g: 100.0,
            ..NutritionFacts::zero(NutritionBasis::Per100g)
        }
    }

    fn components(&self) -> [f64; 8] {
        [
            self.serving_size_g,
            self.calories_kcal,
            self.protein_g,
            self.fat_g,
            self.carbs_g,
            self.sugar_g,
            self.sodium_mg,
            self.fiber_g,
        ]
    }

    fn validate(&self, ctx: &str) -> Result<(), ScenarioError> {
        for (value, field) in self.components().iter().zip([
            "serving_size_g",
            "calories_kcal",
            "protein_g",
            "fat_g",
            "carbs_g",
            "sugar_g",
            "sodium_mg",
            "fiber_g",
        ]) {
            if !value.is_finite() || *value < 0.0 {
                return Err(ScenarioError::Integrity(format!(
                    "{ctx}: nutrition field '{field}' must be a non-negative number"
                )));
            }
        }
        Ok(())
    }
}

/// One record in a catalog collection.
///
/// `price` is the shelf price including tax; `discount` is the multiplicative
/// factor applied to it. Fields the schema does not know about are preserved
/// verbatim in `extra` (expiry dates, storage locations, cooking steps, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub collection: CatalogCollection,
    pub name: String,
    pub category: String,
    pub price: f64,
    pub tax_rate: f64,
    pub discount: f64,
    pub taste: Vec<String>,
    pub nutritional_characteristics: Vec<String>,
    pub country_of_origin: Option<String>,
    pub allergens: Vec<String>,
    pub nutrition: NutritionFacts,
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl CatalogRecord {
    /// A minimal record with the priced attributes set and everything else
    /// empty; used by `add_product` and test fixtures.
    pub fn new(
        collection: CatalogCollection,
        name: &str,
        category: &str,
        price: f64,
        tax_rate: f64,
        discount: f64,
    ) -> Self {
        CatalogRecord {
            collection,
            name: normalize_name(name),
            category: category.to_string(),
            price,
            tax_rate,
            discount,
            taste: Vec::new(),
            nutritional_characteristics: Vec::new(),
            country_of_origin: None,
            allergens: Vec::new(),
            nutrition: NutritionFacts::default_per_100g(),
            extra: serde_json::Map::new(),
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let ctx = format!("catalog record '{}'", self.name);
        if self.name.is_empty() {
            return Err(ScenarioError::Integrity(
                "catalog record has an empty name".into(),
            ));
        }
        if !self.price.is_finite() || self.price < 0.0 {
            return Err(ScenarioError::Integrity(format!("{ctx}: price must be >= 0")));
        }
        if !self.tax_rate.is_finite() || self.tax_rate < 0.0 {
            return Err(ScenarioError::Integrity(format!(
                "{ctx}: tax_rate must be >= 0"
            )));
        }
        if !self.discount.is_finite() || !(0.0..=1.0).contains(&self.discount) {
            return Err(ScenarioError::Integrity(format!(
                "{ctx}: discount must be within [0, 1]"
            )));
        }
        if self.nutrition.basis == NutritionBasis::Total {
            return Err(ScenarioError::Integrity(format!(
                "{ctx}: TOTAL nutrition facts are never stored in the catalog"
            )));
        }
        self.nutrition.validate(&ctx)
    }
}

/// Priced attributes captured on a ledger item when it was added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricedAttrs {
    pub category: String,
    pub price: f64,
    pub tax_rate: f64,
    pub discount: f64,
}

/// One line of a user ledger: a normalized item name, a strictly positive
/// quantity, and the priced attributes when the ledger kind carries them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerItem {
    pub name: String,
    pub quantity: f64,
    pub priced: Option<PricedAttrs>,
}

/// All items of one (user, ledger-kind) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserLedger {
    pub user_id: String,
    pub items: Vec<LedgerItem>,
}

impl UserLedger {
    pub fn item(&self, normalized_name: &str) -> Option<&LedgerItem> {
        self.items.iter().find(|i| i.name == normalized_name)
    }

    pub fn item_mut(&mut self, normalized_name: &str) -> Option<&mut LedgerItem> {
        self.items.iter_mut().find(|i| i.name == normalized_name)
    }
}

/// A dangling ledger reference discovered at load time: the item name does
/// not resolve to any catalog record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DanglingRef {
    pub kind: LedgerKind,
    pub user_id: String,
    pub item_name: String,
}

/// The mutable world state for one scenario.
///
/// One instance is confined to one episode; episodes clone their own copy
/// from the pristine load-time database.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioDatabase {
    pub scenario_id: String,
    pub catalog: Vec<CatalogRecord>,
    pub ledgers: BTreeMap<LedgerKind, Vec<UserLedger>>,
}

impl ScenarioDatabase {
    pub fn empty(scenario_id: &str) -> Self {
        ScenarioDatabase {
            scenario_id: scenario_id.to_string(),
            catalog: Vec::new(),
            ledgers: BTreeMap::new(),
        }
    }

    /// Finds a catalog record by already-normalized name.
    pub fn catalog_record(&self, normalized_name: &str) -> Option<&CatalogRecord> {
        self.catalog.iter().find(|r| r.name == normalized_name)
    }

    /// All normalized catalog names, in catalog order, optionally restricted
    /// to one collection.
    pub fn catalog_names(&self, collection: Option<CatalogCollection>) -> Vec<String> {
        self.catalog
            .iter()
            .filter(|r| collection.is_none_or(|c| r.collection == c))
            .map(|r| r.name.clone())
            .collect()
    }

    /// The ledger for (kind, user), if present.
    pub fn ledger(&self, kind: LedgerKind, user_id: &str) -> Option<&UserLedger> {
        self.ledgers
            .get(&kind)
            .and_then(|l| l.iter().find(|u| u.user_id == user_id))
    }

    /// The ledger for (kind, user), created empty on first use.
    pub fn ledger_mut(&mut self, kind: LedgerKind, user_id: &str) -> &mut UserLedger {
        let ledgers = self.ledgers.entry(kind).or_default();
        if let Some(pos) = ledgers.iter().position(|u| u.user_id == user_id) {
            &mut ledgers[pos]
        } else {
            ledgers.push(UserLedger {
                user_id: user_id.to_string(),
                items: Vec::new(),
            });
            let last = ledgers.len() - 1;
            &mut ledgers[last]
        }
    }

    /// Drops empty ledgers so that "never had a ledger" and "ledger emptied
    /// again" canonicalize identically.
    pub fn prune_empty_ledgers(&mut self) {
        for ledgers in self.ledgers.values_mut() {
            ledgers.retain(|l| !l.items.is_empty());
        }
        self.ledgers.retain(|_, l| !l.is_empty());
    }

    /// Ledger items whose names do not resolve to any catalog record.
    pub fn dangling_references(&self) -> Vec<DanglingRef> {
        let mut out = Vec::new();
        for (kind, ledgers) in &self.ledgers {
            for ledger in ledgers {
                for item in &ledger.items {
                    if self.catalog_record(&item.name).is_none() {
                        out.push(DanglingRef {
                            kind: *kind,
                            user_id: ledger.user_id.clone(),
                            item_name: item.name.clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Checks every structural invariant: unique catalog names, positive
    /// quantities, value ranges, unique (user, kind) pairs.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut seen = std::collections::BTreeSet::new();
        for record in &self.catalog {
            record.validate()?;
            if !seen.insert(record.name.clone()) {
                return Err(ScenarioError::Integrity(format!(
                    "duplicate catalog name '{}' after normalization",
                    record.name
                )));
            }
        }
        for (kind, ledgers) in &self.ledgers {
            let mut users = std::collections::BTreeSet::new();
            for ledger in ledgers {
                if !users.insert(ledger.user_id.clone()) {
                    return Err(ScenarioError::Integrity(format!(
                        "duplicate ledger for user '{}' in {}",
                        ledger.user_id,
                        kind.key()
                    )));
                }
                let mut names = std::collections::BTreeSet::new();
                for item in &ledger.items {
                    if item.name.is_empty() {
                        return Err(ScenarioError::Integrity(format!(
                            "{} for '{}' has an item with an empty name",
                            kind.key(),
                            ledger.user_id
                        )));
                    }
                    if !names.insert(item.name.clone()) {
                        return Err(ScenarioError::Integrity(format!(
                            "{} for '{}' lists '{}' twice",
                            kind.key(),
                            ledger.user_id,
                            item.name
                        )));
                    }
                    if !item.quantity.is_finite() || item.quantity <= 0.0 {
                        return Err(ScenarioError::Integrity(format!(
                            "{} for '{}': quantity of '{}' must be strictly positive",
                            kind.key(),
                            ledger.user_id,
                            item.name
                        )));
                    }
                    if let Some(priced) = &item.priced {
                        if !priced.price.is_finite() || priced.price < 0.0 {
                            return Err(ScenarioError::Integrity(format!(
                                "{} item '{}': price must be >= 0",
                                kind.key(),
                                item.name
                            )));
                        }
                        if !priced.tax_rate.is_finite() || priced.tax_rate < 0.0 {
                            return Err(ScenarioError::Integrity(format!(
                                "{} item '{}': tax_rate must be >= 0",
                                kind.key(),
                                item.name
                            )));
                        }
                        if !priced.discount.is_finite() || !(0.0..=1.0).contains(&priced.discount) {
                            return Err(ScenarioError::Integrity(format!(
                                "{} item '{}': discount must be within [0, 1]",
                                kind.key(),
                                item.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Restores `db` to the pristine load-time copy of the same scenario.
pub fn reset(db: &mut ScenarioDatabase, pristine: &ScenarioDatabase) -> Result<(), ScenarioError> {
    if db.scenario_id != pristine.scenario_id {
        return Err(ScenarioError::ScenarioMismatch {
            expected: db.scenario_id.clone(),
            actual: pristine.scenario_id.clone(),
        });
    }
    *db = pristine.clone();
    Ok(())
}
