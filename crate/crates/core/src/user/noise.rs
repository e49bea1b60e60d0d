//! Hard-mode chatter: scenario-relevant, task-irrelevant sentences appended
//! to user responses in the hard interaction mode.

use rand::Rng;

fn pool_text(scenario_id: &str) -> &'static str {
    let id = scenario_id.to_lowercase();
    if id.contains("kitchen") {
        include_str!("../../assets/noise/kitchen.txt")
    } else if id.contains("restaurant") {
        include_str!("../../assets/noise/restaurant.txt")
    } else if id.contains("order") {
        include_str!("../../assets/noise/order.txt")
    } else if id.contains("retail") {
        include_str!("../../assets/noise/retail.txt")
    } else {
        include_str!("../../assets/noise/generic.txt")
    }
}

/// The noise sentences for a scenario, one per line.
pub fn noise_pool(scenario_id: &str) -> Vec<&'static str> {
    pool_text(scenario_id)
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
}

/// Appends one pool sentence to the message; deterministic under a fixed
/// RNG state. Applied only in the hard interaction mode.
pub fn hard_mode_noise<R: Rng>(scenario_id: &str, base_msg: &str, noise_source: &mut R) -> String {
    let pool = noise_pool(scenario_id);
    if pool.is_empty() {
        return base_msg.to_string();
    }
    let sentence = pool[noise_source.gen_range(0..pool.len())];
    if base_msg.is_empty() {
        sentence.to_string()
    } else {
        format!("{base_msg} {sentence}")
    }
}
