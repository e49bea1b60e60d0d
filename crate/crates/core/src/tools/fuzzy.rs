//! Tiered fuzzy name resolution for retrieval tools.
//!
//! Resolution tries three rules in order and returns every candidate matched
//! by the first rule that produces anything: exact normalized equality,
//! substring containment in either direction, then token overlap (Jaccard
//! over whitespace tokens).

use std::collections::BTreeSet;

use serde::Serialize;

use crate::scenario::normalize_name;

/// Default Jaccard threshold for the token-overlap tier.
pub const TOKEN_OVERLAP_THRESHOLD: f64 = 0.5;

/// The rule that produced a match set; tiers are ordered strictest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchTier {
    Exact,
    Substring,
    TokenOverlap,
}

/// Result of resolving one query against a candidate pool.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchSet {
    pub query: String,
    pub matches: Vec<String>,
    /// The loosest rule used; when `matches` is empty every tier was tried.
    pub tier: MatchTier,
}

impl MatchSet {
    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn is_match(&self) -> bool {
        !self.matches.is_empty()
    }
}

/// Resolves `query` against normalized candidate names with the default
/// token-overlap threshold.
pub fn fuzzy_match(query: &str, candidates: &[String]) -> MatchSet {
    fuzzy_match_with_threshold(query, candidates, TOKEN_OVERLAP_THRESHOLD)
}

/// Resolves `query` with an explicit token-overlap threshold.
pub fn fuzzy_match_with_threshold(
    query: &str,
    candidates: &[String],
    threshold: f64,
) -> MatchSet {
    let normalized = normalize_name(query);
    if normalized.is_empty() {
        return MatchSet {
            query: normalized,
            matches: Vec::new(),
            tier: MatchTier::TokenOverlap,
        };
    }

    let exact: Vec<String> = candidates
        .iter()
        .filter(|c| **c == normalized)
        .cloned()
        .collect();
    if !exact.is_empty() {
        return MatchSet {
            query: normalized,
            matches: exact,
            tier: MatchTier::Exact,
        };
    }

    let substring: Vec<String> = candidates
        .iter()
        .filter(|c| c.contains(&normalized) || normalized.contains(c.as_str()))
        .cloned()
        .collect();
    if !substring.is_empty() {
        return MatchSet {
            query: normalized,
            matches: substring,
            tier: MatchTier::Substring,
        };
    }

    let query_tokens: BTreeSet<&str> = normalized.split_whitespace().collect();
    let overlap: Vec<String> = candidates
        .iter()
        .filter(|c| jaccard(&query_tokens, c) >= threshold)
        .cloned()
        .collect();
    MatchSet {
        query: normalized,
        matches: overlap,
        tier: MatchTier::TokenOverlap,
    }
}

fn jaccard(query_tokens: &BTreeSet<&str>, candidate: &str) -> f64 {
    let candidate_tokens: BTreeSet<&str> = candidate.split_whitespace().collect();
    if query_tokens.is_empty() || candidate_tokens.is_empty() {
        return 0.0;
    }
    let intersection = query_tokens.intersection(&candidate_tokens).count();
    let union = query_tokens.union(&candidate_tokens).count();
    intersection as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn partial_query_resolves_by_substring() {
        let candidates = pool(&["riunite moscato", "mouton cadet", "chateau languedoc"]);
        let set = fuzzy_match("Riunite", &candidates);
        assert_eq!(set.matches, vec!["riunite moscato"]);
        assert_eq!(set.tier, MatchTier::Substring);
    }

    #[test]
    fn exact_normalized_query_is_an_exact_singleton() {
        let candidates = pool(&["riunite moscato", "mouton cadet"]);
        let set = fuzzy_match("  Riunite   Moscato ", &candidates);
        assert_eq!(set.matches, vec!["riunite moscato"]);
        assert_eq!(set.tier, MatchTier::Exact);
    }

    #[test]
    fn reordered_tokens_match_by_token_overlap() {
        // "prosecco brisa" vs "brisa prosecco": identical token sets, so the
        // Jaccard index is exactly 1.0 and the overlap tier fires.
        let candidates = pool(&["brisa prosecco"]);
        let set = fuzzy_match("prosecco brisa", &candidates);
        assert_eq!(set.tier, MatchTier::TokenOverlap);
        assert_eq!(set.matches, vec!["brisa prosecco"]);
    }

    #[test]
    fn below_threshold_is_empty() {
        // One shared token out of three distinct ones: 1/3 < 0.5.
        let candidates = pool(&["chateau languedoc"]);
        let set = fuzzy_match("chateau zind-humbrecht", &candidates);
        assert!(set.is_empty());
        assert_eq!(set.tier, MatchTier::TokenOverlap);
    }

    #[test]
    fn empty_query_matches_nothing() {
        let candidates = pool(&["riunite moscato"]);
        assert!(fuzzy_match("   ", &candidates).is_empty());
    }

    #[test]
    fn exact_tier_wins_over_looser_tiers() {
        let candidates = pool(&["wine", "wine cellar red", "red wine"]);
        let set = fuzzy_match("wine", &candidates);
        assert_eq!(set.tier, MatchTier::Exact);
        assert_eq!(set.matches, vec!["wine"]);
    }
}
