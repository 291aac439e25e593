//! Strategies and reference oracles shared by the property tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;

use appaudit::annotations::{ReviewAnnotation, Transparency};
use appaudit::catalog::{AgeRating, AppRecord, Category, DataSafetyDecl, TriState};
use appaudit::container::axml::ANDROID_NS;
use appaudit::container::{AttrValue, Attribute, Element, Namespace, Node, XmlDocument};
use appaudit::detectors::{
    expand_keywords, Evidence, EvidenceSource, Feature, FeatureProfile, FeatureState, KeywordSet, NormalizedText,
    Phrase, PhraseMatch, SynonymLexicon,
};
use appaudit::rules::{ComplianceRule, Condition, InputKind};

// ---- binary XML ----

fn xml_name() -> impl Strategy<Value = String> {
    "[a-zA-Z_][a-zA-Z0-9_.-]{0,11}"
}

fn any_text() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => "[ -~]{0,24}",
        1 => "\\PC{0,16}",
        1 => "[a-zé漢😀]{120,300}",
    ]
}

fn attr_value() -> impl Strategy<Value = AttrValue> {
    prop_oneof![
        any_text().prop_map(AttrValue::String),
        any::<i32>().prop_map(AttrValue::Int),
        any::<u32>().prop_map(AttrValue::Hex),
        any::<bool>().prop_map(AttrValue::Bool),
        any::<u32>().prop_map(AttrValue::Reference),
        (prop::sample::select(vec![0x04u8, 0x05, 0x06, 0x1c, 0x1d]), any::<u32>())
            .prop_map(|(data_type, data)| AttrValue::Other { data_type, data }),
    ]
}

fn namespace() -> impl Strategy<Value = Option<String>> {
    option::weighted(0.3, prop_oneof![Just(ANDROID_NS.to_string()), "http://[a-z]{1,8}\\.example/ns"])
}

fn attribute() -> impl Strategy<Value = Attribute> {
    (namespace(), xml_name(), attr_value()).prop_map(|(namespace, name, value)| Attribute {
        namespace,
        name,
        value,
    })
}

fn leaf() -> impl Strategy<Value = Element> {
    (namespace(), xml_name(), vec(attribute(), 0..5)).prop_map(|(namespace, name, attributes)| Element {
        namespace,
        name,
        attributes,
        children: Vec::new(),
    })
}

pub fn element_tree() -> impl Strategy<Value = Element> {
    leaf().prop_recursive(4, 40, 5, |inner| {
        (
            leaf(),
            vec(
                prop_oneof![3 => inner.prop_map(Node::Element), 1 => any_text().prop_map(Node::Text)],
                0..5,
            ),
        )
            .prop_map(|(mut e, children)| {
                e.children = children;
                e
            })
    })
}

pub fn document() -> impl Strategy<Value = XmlDocument> {
    let ns = prop_oneof![
        Just(Namespace {
            prefix: "android".into(),
            uri: ANDROID_NS.into(),
        }),
        ("[a-z]{1,6}", "http://[a-z]{1,8}\\.example/ns").prop_map(|(prefix, uri)| Namespace { prefix, uri }),
    ];
    (vec(ns, 0..3), element_tree()).prop_map(|(namespaces, root)| XmlDocument { namespaces, root })
}

pub fn pool_strings() -> impl Strategy<Value = Vec<String>> {
    vec(any_text(), 0..40)
}

// ---- phrase matching ----

pub const VOCAB: &[&str] = &[
    "report", "abuse", "block", "user", "age", "check", "verify", "your", "date", "of", "birth", "parental",
    "consent", "control", "flag", "post", "location", "the", "a", "safe",
];

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(VOCAB).prop_map(str::to_string)
}

fn phrase() -> impl Strategy<Value = Phrase> {
    vec(word(), 1..4).prop_map(Phrase)
}

/// Vocabulary words with random case joined by random separators.
pub fn raw_text() -> impl Strategy<Value = String> {
    vec(
        (
            word(),
            any::<bool>(),
            prop::sample::select(vec![" ", "_", ".", "  ", "-", ":", "\n", "/", "\"", "[", ", "]),
        ),
        0..40,
    )
    .prop_map(|parts| {
        parts
            .into_iter()
            .map(|(w, upper, sep)| {
                let w = if upper { w.to_uppercase() } else { w };
                format!("{w}{sep}")
            })
            .collect()
    })
}

pub fn lexicon() -> impl Strategy<Value = SynonymLexicon> {
    vec((word(), vec(phrase(), 1..3)), 0..5).prop_map(|entries| {
        let mut map: BTreeMap<String, BTreeSet<Phrase>> = BTreeMap::new();
        for (token, syns) in entries {
            for s in syns {
                if s.0 != [token.clone()] {
                    map.entry(token.clone()).or_default().insert(s);
                }
            }
        }
        map.retain(|_, v| !v.is_empty());
        SynonymLexicon { entries: map }
    })
}

pub fn keyword_set() -> impl Strategy<Value = KeywordSet> {
    (vec(phrase(), 1..6), lexicon()).prop_map(|(seeds, lex)| expand_keywords(&seeds, &lex))
}

/// Compares every window of the token stream against every phrase.
pub fn brute_force_matches(text: &NormalizedText, keywords: &KeywordSet) -> Vec<PhraseMatch> {
    let mut out = Vec::new();
    for offset in 0..text.tokens.len() {
        for phrase in &keywords.expanded_phrases {
            let n = phrase.0.len();
            if offset + n <= text.tokens.len() && text.tokens[offset..offset + n] == phrase.0[..] {
                out.push(PhraseMatch {
                    offset,
                    phrase: phrase.clone(),
                });
            }
        }
    }
    out.sort();
    out
}

// ---- rule inputs ----

fn tri() -> impl Strategy<Value = TriState> {
    prop::sample::select(vec![TriState::Yes, TriState::No, TriState::Unknown])
}

fn data_safety() -> impl Strategy<Value = DataSafetyDecl> {
    (
        vec(prop::sample::select(vec!["location", "app activity", "messages"]), 0..3),
        tri(),
        any::<bool>(),
    )
        .prop_map(|(collected, shared, erasure)| DataSafetyDecl {
            data_collected: collected.into_iter().map(str::to_string).collect(),
            shared_with_third_parties: shared,
            erasure_offered: erasure,
        })
}

pub fn record(app_id: String) -> impl Strategy<Value = AppRecord> {
    (
        prop::sample::select(AgeRating::ALL.to_vec()),
        prop::sample::select(Category::ALL.to_vec()),
        any::<bool>(),
        option::of(data_safety()),
    )
        .prop_map(move |(age_rating, category, teacher_approved, data_safety)| AppRecord {
            app_id: app_id.clone(),
            title: format!("App {app_id}"),
            store_link: format!("https://play.google.com/store/apps/details?id=com.example.{app_id}"),
            product_id: format!("com.example.{app_id}"),
            serpapi_link: None,
            thumbnail_link: None,
            rating: None,
            age_rating,
            category,
            country: None,
            teacher_approved,
            data_safety,
        })
}

fn feature_state(feature: Feature) -> impl Strategy<Value = FeatureState> {
    prop_oneof![
        Just(FeatureState::Detected(vec![Evidence {
            feature,
            matched_phrase: Phrase(vec!["x".into()]),
            source: EvidenceSource::StorePage,
            raw_context: "x".into(),
            low_confidence: false,
        }])),
        Just(FeatureState::NotDetected),
        Just(FeatureState::NotEvaluated),
    ]
}

pub fn profile(app_id: String) -> impl Strategy<Value = FeatureProfile> {
    let states: Vec<_> = Feature::ALL.iter().map(|f| feature_state(*f)).collect();
    (states, any::<bool>()).prop_map(move |(states, low_string_yield)| FeatureProfile {
        app_id: app_id.clone(),
        features: Feature::ALL.iter().copied().zip(states).collect(),
        low_string_yield,
    })
}

pub fn annotation(app_id: String) -> impl Strategy<Value = ReviewAnnotation> {
    (
        prop::sample::select(vec![Transparency::Transparent, Transparency::Partial, Transparency::Opaque]),
        any::<bool>(),
        tri(),
        any::<bool>(),
        tri(),
        any::<bool>(),
    )
        .prop_map(move |(transparency, cfl, sharing, no_collection, erasure, email)| ReviewAnnotation {
            app_id: app_id.clone(),
            transparency,
            child_friendly_language: cfl,
            third_party_sharing: sharing,
            declared_no_data_collection: no_collection,
            erasure_promised: erasure,
            contact_email_present: email,
            notes: String::new(),
            reviewed_on: chrono::NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
        })
}

/// One app's inputs with data-safety blocks and annotations randomly withheld.
pub type AppCase = (AppRecord, FeatureProfile, Option<ReviewAnnotation>);

pub fn app_case(n: usize) -> impl Strategy<Value = AppCase> {
    let id = format!("R{n:03}");
    (record(id.clone()), profile(id.clone()), option::of(annotation(id)))
}

pub fn corpus() -> impl Strategy<Value = Vec<AppCase>> {
    (1usize..12).prop_flat_map(|n| (0..n).map(app_case).collect::<Vec<_>>())
}

/// Names the first required input of `rule` that `case` lacks, if any.
pub fn missing_input(rule: &ComplianceRule, case: &AppCase) -> Option<String> {
    let (record, profile, annotation) = case;
    for condition in rule.conditions() {
        match (condition.input_kind(), condition) {
            (InputKind::DataSafety, _) if record.data_safety.is_none() => return Some("data safety".into()),
            (InputKind::Annotation, _) if annotation.is_none() => return Some("annotation".into()),
            (InputKind::Profile, Condition::Feature { feature, .. }) => {
                if profile.state(*feature) == &FeatureState::NotEvaluated {
                    return Some(format!("{feature} not evaluated"));
                }
                if profile.low_string_yield && feature.is_string_based() {
                    return Some(format!("{feature} with low string yield"));
                }
            }
            _ => {}
        }
    }
    None
}
