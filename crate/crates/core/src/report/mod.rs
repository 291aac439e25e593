//! Compliance report assembly and emitters.

mod emit;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emit::{emit_csv, emit_distribution_markdown, emit_json, emit_markdown, parse_json};

use crate::catalog::{AgeBand, AgeRating, AppRecord, Category, DistributionTable};
use crate::detectors::{Feature, FeatureProfile, FeatureState};
use crate::rules::{RuleVerdict, Status};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{what} refers to app `{app_id}`, which is not in the catalog")]
    KeyMismatch { what: &'static str, app_id: String },
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid report JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub generated_at: String,
    pub tool_version: String,
    pub corpus_size: usize,
    pub verbose: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub title: String,
    pub product_id: String,
    pub age_rating: AgeRating,
    pub age_band: AgeBand,
    pub category: Category,
    pub country: Option<String>,
    pub teacher_approved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppReport {
    pub record: RecordSummary,
    pub profile: Option<FeatureProfile>,
    pub verdicts: Vec<RuleVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCount {
    pub feature: Feature,
    pub age_band: AgeBand,
    pub detected: usize,
    pub not_detected: usize,
    pub not_evaluated: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleCounts {
    pub non_compliance: usize,
    pub no_issue: usize,
    pub insufficient: usize,
    pub not_applicable: usize,
}

impl RuleCounts {
    pub fn total(&self) -> usize {
        self.non_compliance + self.no_issue + self.insufficient + self.not_applicable
    }

    pub fn get(&self, status: Status) -> usize {
        match status {
            Status::NonComplianceIndication => self.non_compliance,
            Status::NoIssueFound => self.no_issue,
            Status::InsufficientEvidence => self.insufficient,
            Status::NotApplicable => self.not_applicable,
        }
    }

    fn bump(&mut self, status: Status) {
        match status {
            Status::NonComplianceIndication => self.non_compliance += 1,
            Status::NoIssueFound => self.no_issue += 1,
            Status::InsufficientEvidence => self.insufficient += 1,
            Status::NotApplicable => self.not_applicable += 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub feature_counts: Vec<FeatureCount>,
    pub rule_counts: BTreeMap<String, RuleCounts>,
    pub distributions: Vec<DistributionTable>,
}

impl AggregateStats {
    pub fn feature_count(&self, feature: Feature, band: AgeBand) -> Option<&FeatureCount> {
        self.feature_counts
            .iter()
            .find(|c| c.feature == feature && c.age_band == band)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub meta: ReportMeta,
    pub apps: BTreeMap<String, AppReport>,
    pub aggregates: AggregateStats,
    pub warnings: Vec<String>,
}

impl ComplianceReport {
    pub fn has_indications(&self) -> bool {
        self.aggregates.rule_counts.values().any(|c| c.non_compliance > 0)
    }

    /// Apps with a non-compliance indication for `rule_id`, in id order.
    pub fn indicated_apps(&self, rule_id: &str) -> Vec<&str> {
        self.apps
            .iter()
            .filter(|(_, app)| {
                app.verdicts
                    .iter()
                    .any(|v| v.rule_id == rule_id && v.status == Status::NonComplianceIndication)
            })
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportOptions {
    pub generated_at: String,
    pub tool_version: String,
    /// Keep `NotApplicable` verdicts in the per-app listing.
    pub verbose: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            generated_at: "1970-01-01T00:00:00Z".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            verbose: false,
        }
    }
}

/// Builds the report. `verdicts` should include `NotApplicable` entries so that
/// rule counts cover every app; rules missing for an app count as not applicable.
pub fn build_report(
    catalog: &[AppRecord],
    profiles: &[FeatureProfile],
    verdicts: &[RuleVerdict],
    distributions: Vec<DistributionTable>,
    options: &ReportOptions,
) -> Result<ComplianceReport, ReportError> {
    let ids: BTreeSet<&str> = catalog.iter().map(|r| r.app_id.as_str()).collect();
    let mut by_id: BTreeMap<&str, &FeatureProfile> = BTreeMap::new();
    for p in profiles {
        if !ids.contains(p.app_id.as_str()) {
            return Err(ReportError::KeyMismatch {
                what: "feature profile",
                app_id: p.app_id.clone(),
            });
        }
        by_id.insert(&p.app_id, p);
    }
    let mut by_app: BTreeMap<&str, Vec<&RuleVerdict>> = BTreeMap::new();
    for v in verdicts {
        if !ids.contains(v.app_id.as_str()) {
            return Err(ReportError::KeyMismatch {
                what: "verdict",
                app_id: v.app_id.clone(),
            });
        }
        by_app.entry(&v.app_id).or_default().push(v);
    }

    let mut warnings = Vec::new();
    let mut apps = BTreeMap::new();
    for record in catalog {
        let profile = by_id.get(record.app_id.as_str()).map(|p| (*p).clone());
        if profile.is_none() {
            warnings.push(format!("{}: no feature profile", record.app_id));
        }
        let mut list: Vec<RuleVerdict> = by_app
            .get(record.app_id.as_str())
            .into_iter()
            .flatten()
            .filter(|v| options.verbose || v.status != Status::NotApplicable)
            .map(|v| (*v).clone())
            .collect();
        list.sort_by(|a, b| a.rule_id.cmp(&b.rule_id));
        apps.insert(
            record.app_id.clone(),
            AppReport {
                record: RecordSummary {
                    title: record.title.clone(),
                    product_id: record.product_id.clone(),
                    age_rating: record.age_rating,
                    age_band: record.age_band(),
                    category: record.category,
                    country: record.country.clone(),
                    teacher_approved: record.teacher_approved,
                },
                profile,
                verdicts: list,
            },
        );
    }

    let mut feature_counts = Vec::new();
    for feature in Feature::ALL {
        for band in AgeBand::ALL {
            let mut count = FeatureCount {
                feature,
                age_band: band,
                detected: 0,
                not_detected: 0,
                not_evaluated: 0,
            };
            for record in catalog.iter().filter(|r| r.age_band() == band) {
                match by_id.get(record.app_id.as_str()).map(|p| p.state(feature)) {
                    Some(FeatureState::Detected(_)) => count.detected += 1,
                    Some(FeatureState::NotDetected) => count.not_detected += 1,
                    Some(FeatureState::NotEvaluated) | None => count.not_evaluated += 1,
                }
            }
            feature_counts.push(count);
        }
    }

    let mut rule_counts: BTreeMap<String, RuleCounts> = BTreeMap::new();
    for v in verdicts {
        rule_counts.entry(v.rule_id.clone()).or_default().bump(v.status);
    }
    for counts in rule_counts.values_mut() {
        counts.not_applicable += catalog.len().saturating_sub(counts.total());
    }

    Ok(ComplianceReport {
        meta: ReportMeta {
            generated_at: options.generated_at.clone(),
            tool_version: options.tool_version.clone(),
            corpus_size: catalog.len(),
            verbose: options.verbose,
        },
        apps,
        aggregates: AggregateStats {
            feature_counts,
            rule_counts,
            distributions,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_inputs() {
        let report = build_report(&[], &[], &[], Vec::new(), &ReportOptions::default()).unwrap();
        assert_eq!(report.meta.corpus_size, 0);
        assert!(report.apps.is_empty());
        assert_eq!(report.aggregates.feature_counts.len(), Feature::ALL.len() * 2);
        assert!(report
            .aggregates
            .feature_counts
            .iter()
            .all(|c| c.detected + c.not_detected + c.not_evaluated == 0));
        assert!(!report.has_indications());
    }

    #[test]
    fn unknown_profile_is_key_mismatch() {
        let p = FeatureProfile::not_evaluated("ZZ");
        assert!(matches!(
            build_report(&[], &[p], &[], Vec::new(), &ReportOptions::default()),
            Err(ReportError::KeyMismatch { .. })
        ));
    }
}
