use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::annotations::Transparency;
use crate::catalog::{AgeBand, AgeRating, AppRecord, Category, TriState};
use crate::detectors::Feature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Authority {
    #[serde(rename = "GDPR")]
    Gdpr,
    #[serde(rename = "UKCCIS")]
    Ukccis,
    #[serde(rename = "ICO")]
    Ico,
    #[serde(rename = "ICTCoalition", alias = "ICT Coalition")]
    IctCoalition,
}

impl fmt::Display for Authority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Authority::Gdpr => "GDPR",
            Authority::Ukccis => "UKCCIS",
            Authority::Ico => "ICO",
            Authority::IctCoalition => "ICT Coalition",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegalSource {
    pub authority: Authority,
    pub citation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Statutory,
    Advisory,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Statutory => "statutory",
            Severity::Advisory => "advisory",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Profile,
    DataSafety,
    Annotation,
}

/// Which apps a rule applies to. Empty means every app.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Applicability {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_band: Option<AgeBand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age_ratings: Option<Vec<AgeRating>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories_any: Option<Vec<Category>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories_none: Option<Vec<Category>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teacher_approved: Option<bool>,
}

impl Applicability {
    pub fn matches(&self, record: &AppRecord) -> bool {
        self.mismatch(record).is_none()
    }

    /// The first clause that excludes `record`, phrased for a rationale.
    pub fn mismatch(&self, record: &AppRecord) -> Option<String> {
        if let Some(band) = self.age_band {
            if record.age_band() != band {
                return Some(format!("rule covers {band} apps, this app is {}", record.age_band()));
            }
        }
        if let Some(ratings) = &self.age_ratings {
            if !ratings.contains(&record.age_rating) {
                return Some(format!("age rating {} is not covered", record.age_rating));
            }
        }
        if let Some(any) = &self.categories_any {
            if !any.contains(&record.category) {
                return Some(format!("category {} is not covered", record.category));
            }
        }
        if let Some(none) = &self.categories_none {
            if none.contains(&record.category) {
                return Some(format!("category {} is exempt", record.category));
            }
        }
        if let Some(flag) = self.teacher_approved {
            if record.teacher_approved != flag {
                return Some(format!("teacher_approved is {}", record.teacher_approved));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedState {
    Detected,
    NotDetected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSafetyField {
    #[serde(alias = "collected")]
    DataCollected,
    #[serde(alias = "shared_third_party")]
    SharedWithThirdParties,
    #[serde(alias = "erasure")]
    ErasureOffered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationField {
    Transparency,
    ChildFriendlyLanguage,
    ThirdPartySharing,
    DeclaredNoDataCollection,
    ErasurePromised,
    ContactEmailPresent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Eq,
    Nonempty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueKind {
    Bool,
    Tri,
    Transparency,
    List,
}

impl DataSafetyField {
    fn kind(self) -> ValueKind {
        match self {
            DataSafetyField::DataCollected => ValueKind::List,
            DataSafetyField::SharedWithThirdParties => ValueKind::Tri,
            DataSafetyField::ErasureOffered => ValueKind::Bool,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DataSafetyField::DataCollected => "data_collected",
            DataSafetyField::SharedWithThirdParties => "shared_with_third_parties",
            DataSafetyField::ErasureOffered => "erasure_offered",
        }
    }
}

impl AnnotationField {
    fn kind(self) -> ValueKind {
        match self {
            AnnotationField::Transparency => ValueKind::Transparency,
            AnnotationField::ThirdPartySharing | AnnotationField::ErasurePromised => ValueKind::Tri,
            _ => ValueKind::Bool,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AnnotationField::Transparency => "transparency",
            AnnotationField::ChildFriendlyLanguage => "child_friendly_language",
            AnnotationField::ThirdPartySharing => "third_party_sharing",
            AnnotationField::DeclaredNoDataCollection => "declared_no_data_collection",
            AnnotationField::ErasurePromised => "erasure_promised",
            AnnotationField::ContactEmailPresent => "contact_email_present",
        }
    }
}

/// Test applied to a data-safety or annotation field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueTest {
    Eq(Value),
    Nonempty,
}

/// One atom of a violation conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCondition", into = "RawCondition")]
pub enum Condition {
    Feature {
        feature: Feature,
        state: ExpectedState,
    },
    DataSafety {
        field: DataSafetyField,
        test: ValueTest,
    },
    Annotation {
        field: AnnotationField,
        test: ValueTest,
    },
}

impl Condition {
    pub fn input_kind(&self) -> InputKind {
        match self {
            Condition::Feature { .. } => InputKind::Profile,
            Condition::DataSafety { .. } => InputKind::DataSafety,
            Condition::Annotation { .. } => InputKind::Annotation,
        }
    }

    /// Plain-language statement of the condition holding.
    pub fn describe(&self) -> String {
        match self {
            Condition::Feature { feature, state } => {
                let what = feature.name().replace('_', " ");
                match state {
                    ExpectedState::Detected => format!("{what} was detected"),
                    ExpectedState::NotDetected => format!("{what} was not detected"),
                }
            }
            Condition::DataSafety { field, test } => match test {
                ValueTest::Nonempty => "the data-safety declaration lists collected data".into(),
                ValueTest::Eq(v) => format!("data-safety {} is {}", field.name(), render(v)),
            },
            Condition::Annotation { field, test } => match test {
                ValueTest::Nonempty => format!("review annotation {} is non-empty", field.name()),
                ValueTest::Eq(v) => format!("review annotation {} is {}", field.name(), render(v)),
            },
        }
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCondition {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature: Option<Feature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state: Option<ExpectedState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    data_safety: Option<DataSafetyField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    annotation: Option<AnnotationField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    op: Option<Op>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<Value>,
}

fn value_test(kind: ValueKind, op: Option<Op>, value: Option<Value>) -> Result<ValueTest, String> {
    match op.ok_or("missing `op`")? {
        Op::Nonempty => {
            if kind != ValueKind::List {
                return Err("`nonempty` applies only to list fields".into());
            }
            if value.is_some() {
                return Err("`nonempty` takes no `value`".into());
            }
            Ok(ValueTest::Nonempty)
        }
        Op::Eq => {
            let value = value.ok_or("`eq` requires a `value`")?;
            let ok = match kind {
                ValueKind::Bool => value.is_boolean(),
                ValueKind::Tri => serde_json::from_value::<TriState>(value.clone()).is_ok(),
                ValueKind::Transparency => {
                    serde_json::from_value::<Transparency>(value.clone()).is_ok()
                }
                ValueKind::List => value
                    .as_array()
                    .is_some_and(|items| items.iter().all(Value::is_string)),
            };
            if !ok {
                return Err(format!("value {value} does not fit the field"));
            }
            Ok(ValueTest::Eq(value))
        }
    }
}

impl TryFrom<RawCondition> for Condition {
    type Error = String;

    fn try_from(raw: RawCondition) -> Result<Self, Self::Error> {
        match (raw.feature, raw.data_safety, raw.annotation) {
            (Some(feature), None, None) => {
                if raw.op.is_some() || raw.value.is_some() {
                    return Err("feature conditions take only `state`".into());
                }
                let state = raw.state.ok_or("feature condition requires `state`")?;
                Ok(Condition::Feature { feature, state })
            }
            (None, Some(field), None) if raw.state.is_none() => Ok(Condition::DataSafety {
                field,
                test: value_test(field.kind(), raw.op, raw.value)?,
            }),
            (None, None, Some(field)) if raw.state.is_none() => Ok(Condition::Annotation {
                field,
                test: value_test(field.kind(), raw.op, raw.value)?,
            }),
            _ => Err("a condition names exactly one of `feature`, `data_safety`, `annotation`".into()),
        }
    }
}

impl From<Condition> for RawCondition {
    fn from(c: Condition) -> Self {
        let mut raw = RawCondition {
            feature: None,
            state: None,
            data_safety: None,
            annotation: None,
            op: None,
            value: None,
        };
        let test = match c {
            Condition::Feature { feature, state } => {
                raw.feature = Some(feature);
                raw.state = Some(state);
                return raw;
            }
            Condition::DataSafety { field, test } => {
                raw.data_safety = Some(field);
                test
            }
            Condition::Annotation { field, test } => {
                raw.annotation = Some(field);
                test
            }
        };
        match test {
            ValueTest::Nonempty => raw.op = Some(Op::Nonempty),
            ValueTest::Eq(v) => {
                raw.op = Some(Op::Eq);
                raw.value = Some(v);
            }
        }
        raw
    }
}

/// One conjunction of a rule's violation condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alternative {
    pub id: String,
    pub violation: Vec<Condition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A rule whose violation condition is a disjunction of conjunctions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceRule {
    pub rule_id: String,
    pub title: String,
    pub legal_source: Vec<LegalSource>,
    pub severity: Severity,
    pub applicability: Applicability,
    pub alternatives: Vec<Alternative>,
}

impl ComplianceRule {
    pub fn conditions(&self) -> impl Iterator<Item = &Condition> {
        self.alternatives.iter().flat_map(|a| a.violation.iter())
    }

    pub fn required_inputs(&self) -> BTreeSet<InputKind> {
        self.conditions().map(Condition::input_kind).collect()
    }

    pub fn features(&self) -> BTreeSet<Feature> {
        self.conditions()
            .filter_map(|c| match c {
                Condition::Feature { feature, .. } => Some(*feature),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    pub rules: Vec<ComplianceRule>,
}

impl RuleSet {
    pub fn get(&self, rule_id: &str) -> Option<&ComplianceRule> {
        self.rules.iter().find(|r| r.rule_id == rule_id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Replaces rules with matching ids in place and appends the rest.
    pub fn merge(&mut self, overrides: Vec<ComplianceRule>) {
        for rule in overrides {
            match self.rules.iter_mut().find(|r| r.rule_id == rule.rule_id) {
                Some(slot) => *slot = rule,
                None => self.rules.push(rule),
            }
        }
    }
}
