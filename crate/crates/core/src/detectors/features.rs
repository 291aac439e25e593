use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::keywords::{expand_keywords, match_phrases, KeywordSet};
use super::{normalize, Phrase, SynonymLexicon};
use crate::container::{ManifestDoc, ResourceTable};

/// Content-reporting phrases. Used as-is, never expanded.
pub const CONTENT_REPORT_PHRASES: [&str; 35] = [
    "block and report",
    "block or report",
    "report abuse",
    "report as inappropriate",
    "report bullying",
    "report comment",
    "report content",
    "report explicit image",
    "report extremism",
    "report hate speech",
    "report imminent danger",
    "report inappropriate",
    "report nsfw",
    "report nudity",
    "report or block",
    "report pornograph",
    "report sexually explicit",
    "report this contact",
    "report this group",
    "report this member",
    "report this photo",
    "report this post",
    "report this user",
    "report this video",
    "report user",
    "reportchatchild",
    "reportchatpornography",
    "reportchatviolence",
    "reporting harassment",
    "reporting hateful",
    "reporting nudity",
    "reporting self harm",
    "reporting violence",
    "thanks for reporting",
    "the post you reported has been removed",
];

const AGE_VERIFICATION_SEEDS: [&str; 4] = [
    "age verification",
    "verify your age",
    "date of birth",
    "how old are you",
];

const PARENTAL_CONTROL_SEEDS: [&str; 4] = [
    "parental consent",
    "parentalconsent",
    "parental control",
    "parental controls",
];

const GEOLOCATION_SEEDS: [&str; 1] = ["location"];

/// Prefix of platform-defined permissions; anything else is a custom permission.
const PLATFORM_PERMISSION_PREFIX: &str = "android.permission.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Geolocation,
    AgeVerification,
    ContentReporting,
    ParentalControls,
    TeacherApproved,
}

impl Feature {
    pub const ALL: [Feature; 5] = [
        Feature::Geolocation,
        Feature::AgeVerification,
        Feature::ContentReporting,
        Feature::ParentalControls,
        Feature::TeacherApproved,
    ];

    /// Features detected from string resources.
    pub fn is_string_based(self) -> bool {
        matches!(
            self,
            Feature::AgeVerification | Feature::ContentReporting | Feature::ParentalControls
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::Geolocation => "geolocation",
            Feature::AgeVerification => "age_verification",
            Feature::ContentReporting => "content_reporting",
            Feature::ParentalControls => "parental_controls",
            Feature::TeacherApproved => "teacher_approved",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceField {
    Value,
    Name,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvidenceSource {
    ManifestPermission {
        name: String,
    },
    StringResource {
        locale: String,
        name: String,
        field: ResourceField,
    },
    StorePage,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Evidence {
    pub feature: Feature,
    pub matched_phrase: Phrase,
    pub source: EvidenceSource,
    pub raw_context: String,
    /// Set for matches that may be false positives, such as custom permissions.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "evidence", rename_all = "snake_case")]
pub enum FeatureState {
    Detected(Vec<Evidence>),
    NotDetected,
    NotEvaluated,
}

impl FeatureState {
    fn from_evidence(evidence: Vec<Evidence>) -> FeatureState {
        if evidence.is_empty() {
            FeatureState::NotDetected
        } else {
            FeatureState::Detected(evidence)
        }
    }

    pub fn is_detected(&self) -> bool {
        matches!(self, FeatureState::Detected(_))
    }

    pub fn evidence(&self) -> &[Evidence] {
        match self {
            FeatureState::Detected(e) => e,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureProfile {
    pub app_id: String,
    pub features: BTreeMap<Feature, FeatureState>,
    pub low_string_yield: bool,
}

impl FeatureProfile {
    /// A profile in which nothing could be evaluated.
    pub fn not_evaluated(app_id: &str) -> FeatureProfile {
        FeatureProfile {
            app_id: app_id.to_string(),
            features: Feature::ALL
                .into_iter()
                .map(|f| (f, FeatureState::NotEvaluated))
                .collect(),
            low_string_yield: false,
        }
    }

    pub fn state(&self, feature: Feature) -> &FeatureState {
        self.features
            .get(&feature)
            .unwrap_or(&FeatureState::NotEvaluated)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StoreFlags {
    pub teacher_approved: bool,
}

#[derive(Debug, Error)]
pub enum SeedError {
    #[error("cannot read seed file: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid seed file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("seed file: unknown feature `{0}`")]
    UnknownFeature(String),
}

/// Seed phrases per detector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedConfig {
    pub geolocation: Vec<String>,
    pub age_verification: Vec<String>,
    pub content_reporting: Vec<String>,
    pub parental_controls: Vec<String>,
}

impl Default for SeedConfig {
    fn default() -> Self {
        let owned = |list: &[&str]| list.iter().map(|s| s.to_string()).collect();
        SeedConfig {
            geolocation: owned(&GEOLOCATION_SEEDS),
            age_verification: owned(&AGE_VERIFICATION_SEEDS),
            content_reporting: owned(&CONTENT_REPORT_PHRASES),
            parental_controls: owned(&PARENTAL_CONTROL_SEEDS),
        }
    }
}

impl SeedConfig {
    /// Defaults with the features named in a `{"feature": ["phrase", ...]}` file replaced.
    pub fn load_overrides(path: impl AsRef<Path>) -> Result<SeedConfig, SeedError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_overrides(&text)
    }

    pub fn parse_overrides(text: &str) -> Result<SeedConfig, SeedError> {
        let map: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
        let mut seeds = SeedConfig::default();
        for (feature, phrases) in map {
            match Feature::from_name(&feature) {
                Some(Feature::Geolocation) => seeds.geolocation = phrases,
                Some(Feature::AgeVerification) => seeds.age_verification = phrases,
                Some(Feature::ContentReporting) => seeds.content_reporting = phrases,
                Some(Feature::ParentalControls) => seeds.parental_controls = phrases,
                Some(Feature::TeacherApproved) | None => {
                    return Err(SeedError::UnknownFeature(feature))
                }
            }
        }
        Ok(seeds)
    }
}

fn phrases(list: &[String]) -> Vec<Phrase> {
    list.iter().map(|s| Phrase::parse(s)).collect()
}

/// Expanded keyword sets for every detector, built once and shared.
#[derive(Debug, Clone)]
pub struct Detectors {
    geolocation: KeywordSet,
    age_verification: KeywordSet,
    content_reporting: KeywordSet,
    parental_controls: KeywordSet,
}

impl Detectors {
    pub fn new(seeds: &SeedConfig, lexicon: &SynonymLexicon) -> Detectors {
        Detectors {
            geolocation: expand_keywords(&phrases(&seeds.geolocation), lexicon),
            age_verification: expand_keywords(&phrases(&seeds.age_verification), lexicon),
            content_reporting: KeywordSet::literal(&phrases(&seeds.content_reporting)),
            parental_controls: expand_keywords(&phrases(&seeds.parental_controls), lexicon),
        }
    }

    pub fn keywords(&self, feature: Feature) -> Option<&KeywordSet> {
        match feature {
            Feature::Geolocation => Some(&self.geolocation),
            Feature::AgeVerification => Some(&self.age_verification),
            Feature::ContentReporting => Some(&self.content_reporting),
            Feature::ParentalControls => Some(&self.parental_controls),
            Feature::TeacherApproved => None,
        }
    }

    pub fn geolocation(&self, manifest: &ManifestDoc) -> Vec<Evidence> {
        let mut out = Vec::new();
        for permission in &manifest.permissions {
            let text = normalize(permission);
            let mut seen = BTreeSet::new();
            for m in match_phrases(&text, &self.geolocation) {
                if seen.insert(m.phrase.clone()) {
                    out.push(Evidence {
                        feature: Feature::Geolocation,
                        matched_phrase: m.phrase,
                        source: EvidenceSource::ManifestPermission {
                            name: permission.clone(),
                        },
                        raw_context: permission.clone(),
                        low_confidence: !permission.starts_with(PLATFORM_PERMISSION_PREFIX),
                    });
                }
            }
        }
        out
    }

    pub fn content_reporting(&self, resources: &ResourceTable) -> Vec<Evidence> {
        scan_resources(Feature::ContentReporting, &self.content_reporting, resources)
    }

    pub fn age_verification(&self, resources: &ResourceTable) -> Vec<Evidence> {
        scan_resources(Feature::AgeVerification, &self.age_verification, resources)
    }

    pub fn parental_controls(&self, resources: &ResourceTable) -> Vec<Evidence> {
        scan_resources(Feature::ParentalControls, &self.parental_controls, resources)
    }
}

impl Default for Detectors {
    fn default() -> Self {
        Detectors::new(&SeedConfig::default(), &SynonymLexicon::bundled())
    }
}

/// Scans resource values and names; one evidence item per distinct phrase per field.
fn scan_resources(feature: Feature, keywords: &KeywordSet, resources: &ResourceTable) -> Vec<Evidence> {
    let mut out = Vec::new();
    for ((locale, name), entry) in &resources.entries {
        for (field, raw) in [(ResourceField::Value, &entry.value), (ResourceField::Name, name)] {
            if raw.trim().is_empty() {
                continue;
            }
            let mut seen = BTreeSet::new();
            for m in match_phrases(&normalize(raw), keywords) {
                if seen.insert(m.phrase.clone()) {
                    out.push(Evidence {
                        feature,
                        matched_phrase: m.phrase,
                        source: EvidenceSource::StringResource {
                            locale: locale.clone(),
                            name: name.clone(),
                            field,
                        },
                        raw_context: raw.clone(),
                        low_confidence: false,
                    });
                }
            }
        }
    }
    out
}

pub fn detect_geolocation(manifest: &ManifestDoc, lexicon: Option<&SynonymLexicon>) -> Vec<Evidence> {
    let empty = SynonymLexicon::default();
    let detectors = Detectors::new(&SeedConfig::default(), lexicon.unwrap_or(&empty));
    detectors.geolocation(manifest)
}

pub fn detect_content_reporting(resources: &ResourceTable) -> Vec<Evidence> {
    Detectors::new(&SeedConfig::default(), &SynonymLexicon::default()).content_reporting(resources)
}

pub fn detect_age_verification(resources: &ResourceTable, lexicon: &SynonymLexicon) -> Vec<Evidence> {
    Detectors::new(&SeedConfig::default(), lexicon).age_verification(resources)
}

pub fn detect_parental_controls(resources: &ResourceTable, lexicon: &SynonymLexicon) -> Vec<Evidence> {
    Detectors::new(&SeedConfig::default(), lexicon).parental_controls(resources)
}

/// Runs every detector. Missing inputs leave their features `NotEvaluated`.
pub fn build_feature_profile(
    app_id: &str,
    manifest: Option<&ManifestDoc>,
    resources: Option<&ResourceTable>,
    store: StoreFlags,
    detectors: &Detectors,
) -> FeatureProfile {
    let mut profile = FeatureProfile::not_evaluated(app_id);
    if let Some(manifest) = manifest {
        profile.features.insert(
            Feature::Geolocation,
            FeatureState::from_evidence(detectors.geolocation(manifest)),
        );
    }
    if let Some(resources) = resources {
        profile.low_string_yield = resources.low_string_yield();
        profile.features.insert(
            Feature::AgeVerification,
            FeatureState::from_evidence(detectors.age_verification(resources)),
        );
        profile.features.insert(
            Feature::ContentReporting,
            FeatureState::from_evidence(detectors.content_reporting(resources)),
        );
        profile.features.insert(
            Feature::ParentalControls,
            FeatureState::from_evidence(detectors.parental_controls(resources)),
        );
    }
    let teacher = if store.teacher_approved {
        FeatureState::Detected(vec![Evidence {
            feature: Feature::TeacherApproved,
            matched_phrase: Phrase::parse("teacher approved"),
            source: EvidenceSource::StorePage,
            raw_context: "Teacher Approved".to_string(),
            low_confidence: false,
        }])
    } else {
        FeatureState::NotDetected
    };
    profile.features.insert(Feature::TeacherApproved, teacher);
    profile
}

#[cfg(test)]
mod tests {
    use super::super::parse_lexicon;
    use super::*;
    use crate::container::{Provenance, ResourceString};

    fn table(entries: &[(&str, &str, &str)]) -> ResourceTable {
        let mut t = ResourceTable::default();
        for (locale, name, value) in entries {
            t.insert_first(
                locale,
                name,
                ResourceString {
                    value: value.to_string(),
                    provenance: Provenance::StringsXml {
                        path: "res/values/strings.xml".into(),
                    },
                },
            );
        }
        t
    }

    fn manifest(perms: &[&str]) -> ManifestDoc {
        ManifestDoc {
            package_id: "com.x".into(),
            permissions: perms.iter().map(|s| s.to_string()).collect(),
            ..ManifestDoc::default()
        }
    }

    /// The published phrase table transcribed row by row, four columns per row.
    #[test]
    fn content_report_phrases_pinned() {
        let printed = "\
block and report\tblock or report\treport abuse\treport as inappropriate
report bullying\treport comment\treport content\treport explicit image
report extremism\treport hate speech\treport imminent danger\treport inappropriate
report nsfw\treport nudity\treport or block\treport pornograph
report sexually explicit\treport this contact\treport this group\treport this member
report this photo\treport this post\treport this user\treport this video
report user\treportchatchild\treportchatpornography\treportchatviolence
reporting harassment\treporting hateful\treporting nudity\treporting self harm
reporting violence\tthanks for reporting\tthe post you reported has been removed";
        let cells: Vec<&str> = printed.lines().flat_map(|l| l.split('\t')).collect();
        assert_eq!(CONTENT_REPORT_PHRASES.to_vec(), cells);
        assert_eq!(CONTENT_REPORT_PHRASES.len(), 35);
        let unique: BTreeSet<_> = CONTENT_REPORT_PHRASES.iter().collect();
        assert_eq!(unique.len(), CONTENT_REPORT_PHRASES.len());
    }

    #[test]
    fn geolocation_platform_permissions() {
        let ev = detect_geolocation(&manifest(&["android.permission.ACCESS_COARSE_LOCATION"]), None);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].matched_phrase, Phrase::parse("location"));
        assert!(!ev[0].low_confidence);
        assert!(detect_geolocation(&manifest(&["android.permission.CAMERA"]), None).is_empty());
    }

    #[test]
    fn geolocation_custom_permission_is_low_confidence() {
        let ev = detect_geolocation(&manifest(&["com.foo.LOCATION_SHARE"]), None);
        assert_eq!(ev.len(), 1);
        assert!(ev[0].low_confidence);
    }

    #[test]
    fn geolocation_lexicon_synonym() {
        let lex = parse_lexicon("location|positioning").unwrap();
        let m = manifest(&["com.foo.permission.POSITIONING"]);
        assert!(detect_geolocation(&m, None).is_empty());
        assert_eq!(detect_geolocation(&m, Some(&lex)).len(), 1);
    }

    #[test]
    fn content_reporting() {
        let ev = detect_content_reporting(&table(&[("", "btn", "Report this user")]));
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].matched_phrase, Phrase::parse("report this user"));
        assert!(detect_content_reporting(&table(&[("", "t", "annual report 2023")])).is_empty());
        assert!(detect_content_reporting(&ResourceTable::default()).is_empty());
    }

    #[test]
    fn age_verification() {
        let lex = SynonymLexicon::default();
        let ev = detect_age_verification(
            &table(&[("", "gate", "Please verify your age to continue")]),
            &lex,
        );
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].matched_phrase, Phrase::parse("verify your age"));
        assert!(detect_age_verification(&table(&[("", "x", "agaves certification")]), &lex).is_empty());
        assert!(detect_age_verification(&ResourceTable::default(), &lex).is_empty());

        let lex = parse_lexicon("verification|check").unwrap();
        let ev = detect_age_verification(&table(&[("", "x", "Age check required")]), &lex);
        assert_eq!(ev[0].matched_phrase, Phrase::parse("age check"));
    }

    #[test]
    fn parental_controls_values_and_names() {
        let lex = SynonymLexicon::default();
        let ev = detect_parental_controls(&table(&[("", "msg", "Parental consent required")]), &lex);
        assert_eq!(ev.len(), 1);

        let ev = detect_parental_controls(&table(&[("", "parentalconsent_dialog_title", "OK")]), &lex);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].matched_phrase, Phrase::parse("parentalconsent"));
        assert!(matches!(
            &ev[0].source,
            EvidenceSource::StringResource { field: ResourceField::Name, .. }
        ));
        assert!(detect_parental_controls(&ResourceTable::default(), &lex).is_empty());
    }

    #[test]
    fn empty_profile() {
        let detectors = Detectors::default();
        let profile = build_feature_profile(
            "A01",
            Some(&ManifestDoc::default()),
            Some(&ResourceTable::default()),
            StoreFlags::default(),
            &detectors,
        );
        for f in Feature::ALL {
            assert_eq!(profile.state(f), &FeatureState::NotDetected, "{f}");
        }
        assert!(profile.low_string_yield);
    }

    #[test]
    fn composed_profile() {
        let detectors = Detectors::default();
        let profile = build_feature_profile(
            "A02",
            Some(&manifest(&["android.permission.ACCESS_FINE_LOCATION"])),
            Some(&table(&[("", "menu_report", "Report abuse")])),
            StoreFlags {
                teacher_approved: true,
            },
            &detectors,
        );
        assert!(profile.state(Feature::Geolocation).is_detected());
        assert!(profile.state(Feature::ContentReporting).is_detected());
        let teacher = profile.state(Feature::TeacherApproved).evidence();
        assert_eq!(teacher.len(), 1);
        assert_eq!(teacher[0].source, EvidenceSource::StorePage);
        assert!(!profile.low_string_yield);
    }

    #[test]
    fn missing_inputs_are_not_evaluated() {
        let profile = build_feature_profile("A03", None, None, StoreFlags::default(), &Detectors::default());
        assert_eq!(profile.state(Feature::Geolocation), &FeatureState::NotEvaluated);
        assert_eq!(profile.state(Feature::ParentalControls), &FeatureState::NotEvaluated);
        assert_eq!(profile.state(Feature::TeacherApproved), &FeatureState::NotDetected);
    }

    #[test]
    fn seed_overrides() {
        let seeds = SeedConfig::parse_overrides(r#"{"age_verification": ["enter your birthday"]}"#).unwrap();
        assert_eq!(seeds.age_verification, ["enter your birthday"]);
        assert_eq!(seeds.parental_controls, SeedConfig::default().parental_controls);
        assert!(matches!(
            SeedConfig::parse_overrides(r#"{"colour": []}"#),
            Err(SeedError::UnknownFeature(_))
        ));
    }
}
