//! Built-in tool behaviors and their schemas.
//!
//! Scenario toolset files select from this catalog by name; each entry has
//! one executor in the engine. The retail family is complete; the kitchen
//! and list/menu tools cover the cross-scenario write surface.

use super::{ParamType, ToolKind, ToolParam, ToolSchema};

fn schema(name: &str, kind: ToolKind, description: &str, params: Vec<ToolParam>) -> ToolSchema {
    ToolSchema {
        tool_name: name.into(),
        description: description.into(),
        parameters: params,
        kind,
        raw_doc: None,
    }
}

fn product_name(desc: &str) -> ToolParam {
    ToolParam::string("product_name", true, desc)
}

fn user_id() -> ToolParam {
    ToolParam::string("user_id", true, "The unique identifier of the user")
}

fn products_array() -> ToolParam {
    let mut p = ToolParam::array(
        "products",
        true,
        "List of products, each with product_name and quantity",
        true,
    );
    p.param_type = ParamType::Array;
    p
}

/// Every built-in tool, in a fixed order.
pub fn builtin_catalog() -> Vec<ToolSchema> {
    let mut qty = ToolParam::number("qty", true, "Quantity to add");
    qty.exclusive_min = Some(0.0);
    let mut remove_qty = ToolParam::number("qty", false, "Quantity to remove; the whole entry when omitted");
    remove_qty.exclusive_min = Some(0.0);
    let mut price = ToolParam::number("price", true, "Shelf price including tax.");
    price.min = Some(0.0);
    let mut tax_rate = ToolParam::number("tax_rate", true, "Tax rate (e.g., 0.08 for 8%)");
    tax_rate.min = Some(0.0);
    let mut discount = ToolParam::number(
        "discount",
        true,
        "Discount factor: final amount = price * discount.",
    );
    discount.min = Some(0.0);
    discount.max = Some(1.0);
    let mut list_qty = ToolParam::number("quantity", true, "Quantity to add");
    list_qty.exclusive_min = Some(0.0);
    let mut list_remove_qty =
        ToolParam::number("quantity", false, "Quantity to remove; the whole entry when omitted");
    list_remove_qty.exclusive_min = Some(0.0);

    vec![
        // Read
        schema(
            "get_price",
            ToolKind::Read,
            "Get the shelf price of a product.",
            vec![product_name("Name of the product; partial names are matched")],
        ),
        schema(
            "get_tax_rate",
            ToolKind::Read,
            "Get the tax rate of a product.",
            vec![product_name("Name of the product; partial names are matched")],
        ),
        schema(
            "get_category",
            ToolKind::Read,
            "Get the category of a product.",
            vec![product_name("Name of the product; partial names are matched")],
        ),
        schema(
            "get_discount",
            ToolKind::Read,
            "Get the discount factor of a product.",
            vec![product_name("Name of the product; partial names are matched")],
        ),
        schema(
            "get_nutrition",
            ToolKind::Read,
            "Get the nutrition facts of a product.",
            vec![product_name("Name of the product; partial names are matched")],
        ),
        schema(
            "get_cart",
            ToolKind::Read,
            "Get all items in a user's cart.",
            vec![user_id()],
        ),
        schema(
            "get_shopping_list",
            ToolKind::Read,
            "Get all items in a user's shopping list.",
            vec![user_id()],
        ),
        schema(
            "find_products_by_taste",
            ToolKind::Read,
            "Find all products with the given taste.",
            vec![ToolParam::string("taste", true, "Taste to search for")],
        ),
        schema(
            "find_products_by_nutritional_characteristic",
            ToolKind::Read,
            "Find all products with the given nutritional characteristic.",
            vec![ToolParam::string(
                "characteristic",
                true,
                "Nutritional characteristic to search for",
            )],
        ),
        schema(
            "find_products_by_country_of_origin",
            ToolKind::Read,
            "Find all products from the given country.",
            vec![ToolParam::string("country", true, "Country of origin")],
        ),
        schema(
            "find_products_by_price_range",
            ToolKind::Read,
            "Find all products priced within the inclusive range.",
            vec![
                ToolParam::number("min_price", true, "Lower bound, inclusive"),
                ToolParam::number("max_price", true, "Upper bound, inclusive"),
            ],
        ),
        schema(
            "list_discounted_products",
            ToolKind::Read,
            "List all products with an active discount.",
            vec![],
        ),
        schema(
            "get_current_menu",
            ToolKind::Read,
            "Get the recipes on a user's menu.",
            vec![user_id()],
        ),
        schema(
            "get_current_shopping_list",
            ToolKind::Read,
            "Get all items in a user's shopping list.",
            vec![user_id()],
        ),
        schema(
            "get_all_recipe_names",
            ToolKind::Read,
            "List the names of all recipes.",
            vec![],
        ),
        schema(
            "get_all_ingredient_names",
            ToolKind::Read,
            "List the names of all ingredients.",
            vec![],
        ),
        schema(
            "find_recipes_by_ingredient",
            ToolKind::Read,
            "Find all recipes that use the given ingredient.",
            vec![ToolParam::string(
                "ingredient_name",
                true,
                "Name of the ingredient; partial names are matched",
            )],
        ),
        schema(
            "get_recipe_ingredients",
            ToolKind::Read,
            "Get the ingredient list of a recipe.",
            vec![ToolParam::string(
                "recipe_name",
                true,
                "Name of the recipe; partial names are matched",
            )],
        ),
        // Write
        schema(
            "add_product",
            ToolKind::Write,
            "Add a new product to the catalog.",
            vec![
                ToolParam::string("name", true, "Name of the product"),
                ToolParam::string("category", true, "Category of the product"),
                price.clone(),
                tax_rate.clone(),
                discount.clone(),
            ],
        ),
        schema(
            "delete_product",
            ToolKind::Write,
            "Delete a product from the catalog.",
            vec![product_name("Exact name of the product to delete")],
        ),
        schema(
            "add_to_cart",
            ToolKind::Write,
            "Add quantity of a product to a user's cart.",
            vec![
                user_id(),
                product_name("Name of the product"),
                qty,
                ToolParam::string("category", true, "Category of the product"),
                price,
                tax_rate,
                discount,
            ],
        ),
        schema(
            "remove_from_cart",
            ToolKind::Write,
            "Remove quantity of a product from a user's cart.",
            vec![user_id(), product_name("Name of the product"), remove_qty],
        ),
        schema(
            "clear_cart",
            ToolKind::Write,
            "Remove every item from a user's cart.",
            vec![user_id()],
        ),
        schema(
            "add_to_shopping_list",
            ToolKind::Write,
            "Add quantity of an item to a user's shopping list.",
            vec![user_id(), product_name("Name of the item"), list_qty],
        ),
        schema(
            "remove_from_shopping_list",
            ToolKind::Write,
            "Remove quantity of an item from a user's shopping list.",
            vec![user_id(), product_name("Name of the item"), list_remove_qty],
        ),
        schema(
            "add_recipe_to_menu",
            ToolKind::Write,
            "Add a recipe to a user's menu.",
            vec![
                user_id(),
                ToolParam::string("recipe_name", true, "Name of the recipe"),
            ],
        ),
        schema(
            "remove_recipe_from_menu",
            ToolKind::Write,
            "Remove a recipe from a user's menu.",
            vec![
                user_id(),
                ToolParam::string("recipe_name", true, "Name of the recipe"),
            ],
        ),
        // Calculation
        schema(
            "compute_total_payment",
            ToolKind::Calc,
            "Compute total payable amount for the specified products: sum(price * discount * qty).",
            vec![user_id(), products_array()],
        ),
        schema(
            "compute_total_tax",
            ToolKind::Calc,
            "Compute the total tax contained in the payable amount for the specified products.",
            vec![user_id(), products_array()],
        ),
        schema(
            "compute_total_nutrition",
            ToolKind::Calc,
            "Compute the total nutrition facts for the specified products.",
            vec![user_id(), products_array()],
        ),
    ]
}

/// Looks up one built-in schema by (case-insensitive) name.
pub fn builtin_schema(name: &str) -> Option<ToolSchema> {
    let key = crate::scenario::normalize_name(name);
    builtin_catalog()
        .into_iter()
        .find(|s| s.tool_name == key)
}

/// The retail toolset: 12 read, 5 write, and 3 calculation tools.
pub fn retail_toolset() -> Vec<ToolSchema> {
    const RETAIL: [&str; 20] = [
        "get_nutrition",
        "get_price",
        "get_tax_rate",
        "get_category",
        "get_discount",
        "get_cart",
        "get_shopping_list",
        "find_products_by_nutritional_characteristic",
        "find_products_by_taste",
        "find_products_by_country_of_origin",
        "find_products_by_price_range",
        "list_discounted_products",
        "add_product",
        "delete_product",
        "add_to_cart",
        "remove_from_cart",
        "clear_cart",
        "compute_total_payment",
        "compute_total_tax",
        "compute_total_nutrition",
    ];
    RETAIL
        .iter()
        .map(|name| builtin_schema(name).expect("retail tool is built in"))
        .collect()
}
