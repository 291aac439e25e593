use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::model::{
    AnnotationField, ComplianceRule, Condition, DataSafetyField, ExpectedState, InputKind, RuleSet,
    Severity, ValueTest,
};
use super::RuleError;
use crate::annotations::ReviewAnnotation;
use crate::catalog::{AppRecord, DataSafetyDecl};
use crate::detectors::{Evidence, Feature, FeatureProfile, FeatureState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    NonComplianceIndication,
    NoIssueFound,
    InsufficientEvidence,
    NotApplicable,
}

impl Status {
    pub const ALL: [Status; 4] = [
        Status::NonComplianceIndication,
        Status::NoIssueFound,
        Status::InsufficientEvidence,
        Status::NotApplicable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Status::NonComplianceIndication => "non_compliance_indication",
            Status::NoIssueFound => "no_issue_found",
            Status::InsufficientEvidence => "insufficient_evidence",
            Status::NotApplicable => "not_applicable",
        }
    }
}

/// An input consulted (or found missing) while evaluating a rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictEvidence {
    Feature {
        feature: Feature,
        detected: bool,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        items: Vec<Evidence>,
    },
    DataSafety {
        field: DataSafetyField,
        value: Value,
    },
    Annotation {
        field: AnnotationField,
        value: Value,
    },
    Missing {
        input: InputKind,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleVerdict {
    pub rule_id: String,
    pub app_id: String,
    pub status: Status,
    pub severity: Severity,
    pub evidence: Vec<VerdictEvidence>,
    pub rationale: String,
}

/// The per-app inputs a rule is evaluated over.
#[derive(Debug, Clone, Copy)]
pub struct AppInput<'a> {
    pub record: &'a AppRecord,
    pub profile: &'a FeatureProfile,
    pub annotation: Option<&'a ReviewAnnotation>,
}

fn data_safety_value(ds: &DataSafetyDecl, field: DataSafetyField) -> Value {
    match field {
        DataSafetyField::DataCollected => serde_json::json!(ds.data_collected),
        DataSafetyField::SharedWithThirdParties => serde_json::json!(ds.shared_with_third_parties),
        DataSafetyField::ErasureOffered => Value::Bool(ds.erasure_offered),
    }
}

fn annotation_value(a: &ReviewAnnotation, field: AnnotationField) -> Value {
    match field {
        AnnotationField::Transparency => serde_json::json!(a.transparency),
        AnnotationField::ChildFriendlyLanguage => Value::Bool(a.child_friendly_language),
        AnnotationField::ThirdPartySharing => serde_json::json!(a.third_party_sharing),
        AnnotationField::DeclaredNoDataCollection => Value::Bool(a.declared_no_data_collection),
        AnnotationField::ErasurePromised => serde_json::json!(a.erasure_promised),
        AnnotationField::ContactEmailPresent => Value::Bool(a.contact_email_present),
    }
}

fn passes(test: &ValueTest, actual: &Value) -> bool {
    match test {
        ValueTest::Nonempty => actual.as_array().is_some_and(|a| !a.is_empty()),
        ValueTest::Eq(expected) => expected == actual,
    }
}

/// Reasons the rule cannot be decided for this app; empty when all inputs are present.
fn missing_inputs(rule: &ComplianceRule, input: &AppInput<'_>) -> Vec<VerdictEvidence> {
    let mut missing = Vec::new();
    for kind in rule.required_inputs() {
        match kind {
            InputKind::DataSafety if input.record.data_safety.is_none() => {
                missing.push(VerdictEvidence::Missing {
                    input: kind,
                    reason: "no data-safety declaration".into(),
                })
            }
            InputKind::Annotation if input.annotation.is_none() => {
                missing.push(VerdictEvidence::Missing {
                    input: kind,
                    reason: "no review annotation".into(),
                })
            }
            InputKind::Profile => {
                for feature in rule.features() {
                    if *input.profile.state(feature) == FeatureState::NotEvaluated {
                        missing.push(VerdictEvidence::Missing {
                            input: kind,
                            reason: format!("{feature} was not evaluated"),
                        });
                    } else if input.profile.low_string_yield && feature.is_string_based() {
                        missing.push(VerdictEvidence::Missing {
                            input: kind,
                            reason: format!("low string yield limits {feature} detection"),
                        });
                    }
                }
            }
            _ => {}
        }
    }
    missing
}

/// Evaluates one condition whose inputs are known to be present.
fn check(condition: &Condition, input: &AppInput<'_>) -> (bool, VerdictEvidence) {
    match condition {
        Condition::Feature { feature, state } => {
            let actual = input.profile.state(*feature);
            let detected = actual.is_detected();
            let holds = match state {
                ExpectedState::Detected => detected,
                ExpectedState::NotDetected => !detected,
            };
            let evidence = VerdictEvidence::Feature {
                feature: *feature,
                detected,
                items: actual.evidence().to_vec(),
            };
            (holds, evidence)
        }
        Condition::DataSafety { field, test } => {
            let ds = input.record.data_safety.as_ref().expect("gated on data safety");
            let value = data_safety_value(ds, *field);
            (passes(test, &value), VerdictEvidence::DataSafety { field: *field, value })
        }
        Condition::Annotation { field, test } => {
            let a = input.annotation.expect("gated on annotation");
            let value = annotation_value(a, *field);
            (passes(test, &value), VerdictEvidence::Annotation { field: *field, value })
        }
    }
}

fn push_unique(list: &mut Vec<VerdictEvidence>, item: VerdictEvidence) {
    if !list.contains(&item) {
        list.push(item);
    }
}

pub fn evaluate_rule(rule: &ComplianceRule, input: AppInput<'_>) -> Result<RuleVerdict, RuleError> {
    if input.record.app_id != input.profile.app_id {
        return Err(RuleError::AppIdMismatch {
            rule_id: rule.rule_id.clone(),
            record: input.record.app_id.clone(),
            profile: input.profile.app_id.clone(),
        });
    }
    let verdict = |status, evidence, rationale| RuleVerdict {
        rule_id: rule.rule_id.clone(),
        app_id: input.record.app_id.clone(),
        status,
        severity: rule.severity,
        evidence,
        rationale,
    };

    if let Some(reason) = rule.applicability.mismatch(input.record) {
        return Ok(verdict(Status::NotApplicable, Vec::new(), format!("Not applicable: {reason}.")));
    }

    let missing = missing_inputs(rule, &input);
    if !missing.is_empty() {
        let reasons: Vec<&str> = missing
            .iter()
            .filter_map(|m| match m {
                VerdictEvidence::Missing { reason, .. } => Some(reason.as_str()),
                _ => None,
            })
            .collect();
        let rationale = format!("Insufficient evidence: {}.", reasons.join(", "));
        return Ok(verdict(Status::InsufficientEvidence, missing, rationale));
    }

    let mut fired = Vec::new();
    let mut fired_evidence = Vec::new();
    let mut consulted = Vec::new();
    for alternative in &rule.alternatives {
        let mut holds = true;
        let mut evidence = Vec::new();
        for condition in &alternative.violation {
            let (ok, item) = check(condition, &input);
            holds &= ok;
            evidence.push(item);
        }
        if holds {
            let mut text = alternative
                .violation
                .iter()
                .map(Condition::describe)
                .collect::<Vec<_>>()
                .join(" and ");
            if let Some(note) = &alternative.note {
                text.push_str(&format!(" ({note})"));
            }
            fired.push(text);
            evidence.into_iter().for_each(|e| push_unique(&mut fired_evidence, e));
        } else {
            evidence.into_iter().for_each(|e| push_unique(&mut consulted, e));
        }
    }

    if fired.is_empty() {
        let rationale = format!("No issue found: {} is not indicated.", rule.title);
        Ok(verdict(Status::NoIssueFound, consulted, rationale))
    } else {
        let rationale = format!(
            "Indication of non-compliance with {}: {}.",
            rule.title,
            fired.join("; ")
        );
        Ok(verdict(Status::NonComplianceIndication, fired_evidence, rationale))
    }
}

#[derive(Debug, Default)]
pub struct Evaluation {
    pub verdicts: Vec<RuleVerdict>,
    pub errors: Vec<RuleError>,
}

/// Evaluates every rule for every app, sorted by (app_id, rule_id).
/// `NotApplicable` verdicts are kept only when `verbose` is set.
pub fn evaluate_all(rules: &RuleSet, corpus: &[AppInput<'_>], verbose: bool) -> Evaluation {
    let mut out = Evaluation::default();
    for input in corpus {
        for rule in &rules.rules {
            match evaluate_rule(rule, *input) {
                Ok(v) if v.status == Status::NotApplicable && !verbose => {}
                Ok(v) => out.verdicts.push(v),
                Err(e) => out.errors.push(e),
            }
        }
    }
    out.verdicts
        .sort_by(|a, b| (&a.app_id, &a.rule_id).cmp(&(&b.app_id, &b.rule_id)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::Transparency;
    use crate::catalog::{parse_catalog, TriState};
    use crate::detectors::{EvidenceSource, Phrase};
    use crate::rules::builtin_rules;

    fn record(id: &str, rating: &str, category: &str, extra: &str) -> AppRecord {
        let json = format!(
            r#"[{{"app_id":"{id}","title":"App {id}","link":"l","product_id":"p.{id}","age_rating":"{rating}","category":"{category}"{extra}}}]"#
        );
        parse_catalog(&json).unwrap().records.remove(0)
    }

    fn profile(id: &str, detected: &[Feature]) -> FeatureProfile {
        let mut p = FeatureProfile::not_evaluated(id);
        for f in Feature::ALL {
            let state = if detected.contains(&f) {
                FeatureState::Detected(vec![Evidence {
                    feature: f,
                    matched_phrase: Phrase::parse("x"),
                    source: EvidenceSource::StorePage,
                    raw_context: "x".into(),
                    low_confidence: false,
                }])
            } else {
                FeatureState::NotDetected
            };
            p.features.insert(f, state);
        }
        p
    }

    fn annotation(id: &str) -> ReviewAnnotation {
        ReviewAnnotation {
            app_id: id.into(),
            transparency: Transparency::Transparent,
            child_friendly_language: true,
            third_party_sharing: TriState::No,
            declared_no_data_collection: false,
            erasure_promised: TriState::Unknown,
            contact_email_present: true,
            notes: String::new(),
            reviewed_on: chrono::NaiveDate::from_ymd_opt(2023, 1, 1).unwrap(),
        }
    }

    fn status(rule_id: &str, r: &AppRecord, p: &FeatureProfile, a: Option<&ReviewAnnotation>) -> Status {
        let rules = builtin_rules();
        let input = AppInput { record: r, profile: p, annotation: a };
        evaluate_rule(rules.get(rule_id).unwrap(), input).unwrap().status
    }

    const A05_SAFETY: &str = r#","data_safety":{"collected":["location","app activity","app info and performance","device and other ids"],"shared_third_party":"unknown","erasure":false}"#;

    #[test]
    fn erase_table_row() {
        let r = record("A05", "Everyone", "Education", A05_SAFETY);
        let rules = builtin_rules();
        let v = evaluate_rule(
            rules.get("ERASE-01").unwrap(),
            AppInput { record: &r, profile: &profile("A05", &[]), annotation: None },
        )
        .unwrap();
        assert_eq!(v.status, Status::NonComplianceIndication);
        assert_eq!(v.evidence.len(), 2);

        let ok = record("A06", "Everyone", "Education", &A05_SAFETY.replace("false", "true"));
        assert_eq!(status("ERASE-01", &ok, &profile("A06", &[]), None), Status::NoIssueFound);
        let none = record("A07", "Everyone", "Education", "");
        assert_eq!(status("ERASE-01", &none, &profile("A07", &[]), None), Status::InsufficientEvidence);
    }

    #[test]
    fn geolocation_carve_out() {
        let p = profile("C1", &[Feature::Geolocation]);
        let comm = record("C1", "Everyone", "Communication", "");
        assert_eq!(status("GEO-U13-01", &comm, &p, None), Status::NotApplicable);
        let tools = record("C1", "Everyone", "Tools", "");
        assert_eq!(status("GEO-U13-01", &tools, &p, None), Status::NonComplianceIndication);
        let teen = record("C1", "Teen", "Tools", "");
        assert_eq!(status("GEO-U13-01", &teen, &p, None), Status::NotApplicable);
    }

    #[test]
    fn transparency_levels() {
        let r = record("T1", "Teen", "Social", "");
        let p = profile("T1", &[]);
        let mut a = annotation("T1");
        assert_eq!(status("TRANS-01", &r, &p, Some(&a)), Status::NoIssueFound);
        a.transparency = Transparency::Opaque;
        assert_eq!(status("TRANS-01", &r, &p, Some(&a)), Status::NonComplianceIndication);
        a.transparency = Transparency::Partial;
        let rules = builtin_rules();
        let v = evaluate_rule(
            rules.get("TRANS-01").unwrap(),
            AppInput { record: &r, profile: &p, annotation: Some(&a) },
        )
        .unwrap();
        assert_eq!(v.status, Status::NonComplianceIndication);
        assert!(v.rationale.contains("reduced confidence"));
        assert_eq!(status("TRANS-01", &r, &p, None), Status::InsufficientEvidence);
    }

    #[test]
    fn age_appropriate_gating() {
        let r = record("G1", "Everyone", "Game", "");
        let p = profile("G1", &[]);
        let mut a = annotation("G1");
        a.child_friendly_language = false;
        assert_eq!(status("AGEAPP-01", &r, &p, Some(&a)), Status::NonComplianceIndication);
        assert_eq!(status("AGEAPP-01", &r, &p, None), Status::InsufficientEvidence);
        let teacher = profile("G1", &[Feature::TeacherApproved]);
        assert_eq!(status("AGEAPP-01", &r, &teacher, Some(&a)), Status::NoIssueFound);
    }

    #[test]
    fn sharing_either_source() {
        let shared = r#","data_safety":{"collected":[],"shared_third_party":"yes","erasure":true}"#;
        let r = record("S1", "Everyone", "Game", shared);
        let p = profile("S1", &[]);
        let a = annotation("S1");
        assert_eq!(status("SHARE-U13-01", &r, &p, Some(&a)), Status::NonComplianceIndication);
        let r = record("S1", "Everyone", "Game", &shared.replace("yes", "no"));
        assert_eq!(status("SHARE-U13-01", &r, &p, Some(&a)), Status::NoIssueFound);
        let mut a = annotation("S1");
        a.third_party_sharing = TriState::Yes;
        assert_eq!(status("SHARE-U13-01", &r, &p, Some(&a)), Status::NonComplianceIndication);
    }

    #[test]
    fn low_string_yield_gates_string_features() {
        let r = record("L1", "Teen", "Social", "");
        let mut p = profile("L1", &[]);
        p.low_string_yield = true;
        assert_eq!(status("REPORT-01", &r, &p, None), Status::InsufficientEvidence);
        assert_eq!(status("PARENT-01", &r, &p, None), Status::InsufficientEvidence);
        let u = record("L1", "Everyone", "Tools", "");
        assert_eq!(status("GEO-U13-01", &u, &p, None), Status::NoIssueFound);
    }

    #[test]
    fn not_evaluated_features_are_missing_input() {
        let r = record("N1", "Teen", "Social", "");
        let p = FeatureProfile::not_evaluated("N1");
        assert_eq!(status("AGEVERIF-01", &r, &p, None), Status::InsufficientEvidence);
    }

    #[test]
    fn app_id_mismatch() {
        let rules = builtin_rules();
        let r = record("M1", "Teen", "Social", "");
        let p = profile("M2", &[]);
        let err = evaluate_rule(&rules.rules[0], AppInput { record: &r, profile: &p, annotation: None });
        assert!(matches!(err, Err(RuleError::AppIdMismatch { .. })));
    }

    #[test]
    fn evaluate_all_sorting_and_verbosity() {
        let rules = builtin_rules();
        assert!(evaluate_all(&rules, &[], true).verdicts.is_empty());
        let records = [record("B2", "Teen", "Social", ""), record("B1", "Everyone", "Game", "")];
        let profiles = [profile("B2", &[]), profile("B1", &[])];
        let inputs: Vec<AppInput<'_>> = records
            .iter()
            .zip(&profiles)
            .map(|(record, profile)| AppInput { record, profile, annotation: None })
            .collect();
        let verbose = evaluate_all(&rules, &inputs, true);
        assert_eq!(verbose.verdicts.len(), 18);
        assert_eq!(verbose.verdicts[0].app_id, "B1");
        assert!(verbose
            .verdicts
            .windows(2)
            .all(|w| (&w[0].app_id, &w[0].rule_id) < (&w[1].app_id, &w[1].rule_id)));
        let terse = evaluate_all(&rules, &inputs, false);
        assert!(terse.verdicts.iter().all(|v| v.status != Status::NotApplicable));
        assert!(terse
            .verdicts
            .iter()
            .filter(|v| v.rule_id == "TRANS-01")
            .all(|v| v.status == Status::InsufficientEvidence));
    }
}
