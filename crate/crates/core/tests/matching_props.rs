mod support;

use proptest::prelude::*;

use appaudit::detectors::{match_phrases, normalize};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn match_phrases_equals_window_scan(text in support::raw_text(), keywords in support::keyword_set()) {
        let normalized = normalize(&text);
        prop_assert_eq!(match_phrases(&normalized, &keywords), support::brute_force_matches(&normalized, &keywords));
    }

    #[test]
    fn normalize_is_idempotent(text in "\\PC{0,64}") {
        let once = normalize(&text);
        prop_assert_eq!(normalize(&once.joined()).tokens, once.tokens.clone());
        prop_assert!(once.tokens.iter().all(|t| !t.is_empty() && t.chars().all(char::is_alphanumeric)));
    }

    #[test]
    fn normalize_ignores_case_and_separators(text in support::raw_text()) {
        let a = normalize(&text);
        let b = normalize(&text.to_lowercase().replace(['_', '.', ':', '/', '"', '[', '-', ','], " "));
        prop_assert_eq!(a.tokens, b.tokens);
    }
}
