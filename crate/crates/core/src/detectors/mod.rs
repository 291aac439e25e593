//! Text normalization, keyword expansion and the feature detectors.

mod features;
mod keywords;
mod lexicon;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use features::{
    build_feature_profile, detect_age_verification, detect_content_reporting,
    detect_geolocation, detect_parental_controls, Detectors, Evidence, EvidenceSource, Feature,
    FeatureProfile, FeatureState, ResourceField, SeedConfig, SeedError, StoreFlags,
    CONTENT_REPORT_PHRASES,
};
pub use keywords::{expand_keywords, match_phrases, KeywordSet, PhraseMatch, MAX_VARIANTS_PER_SEED};
pub use lexicon::{load_lexicon, parse_lexicon, LexiconError, SynonymLexicon};

/// Characters the original keyword procedure strips before searching.
/// Normalization splits on every non-alphanumeric character, a superset.
pub const STRIP_SET: [char; 10] = ['<', '"', '_', ':', '=', '.', '/', '>', '[', ']'];

/// A sequence of normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phrase(pub Vec<String>);

impl Phrase {
    pub fn parse(text: &str) -> Phrase {
        Phrase(normalize(text).tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalizedText {
    pub tokens: Vec<String>,
    pub source_ref: String,
}

impl NormalizedText {
    pub fn with_source(mut self, source_ref: impl Into<String>) -> Self {
        self.source_ref = source_ref.into();
        self
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Lowercases `text` and splits it into alphanumeric tokens.
pub fn normalize(text: &str) -> NormalizedText {
    let lower = text.to_lowercase();
    let tokens = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    NormalizedText {
        tokens,
        source_ref: String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permission_name() {
        assert_eq!(
            normalize("android.permission.ACCESS_FINE_LOCATION").tokens,
            ["android", "permission", "access", "fine", "location"]
        );
    }

    #[test]
    fn empty_and_separator_only() {
        assert!(normalize("").tokens.is_empty());
        assert!(normalize("  <\"_:=./>[]  ").tokens.is_empty());
    }

    #[test]
    fn strip_set_and_whitespace_split() {
        assert_eq!(
            normalize("a<b\"c_d:e=f.g/h>i[j]k\tl\nm  n").tokens,
            ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m", "n"]
        );
        assert_eq!(normalize("teacher-approved").tokens, ["teacher", "approved"]);
        assert_eq!(normalize("parentalconsent").tokens, ["parentalconsent"]);
    }

    #[test]
    fn non_ascii_letters_are_kept() {
        assert_eq!(normalize("Contrôle PARENTAL").tokens, ["contrôle", "parental"]);
    }
}
