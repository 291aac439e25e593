//! Declarative compliance rules and their evaluation.

mod eval;
mod model;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

pub use eval::{evaluate_all, evaluate_rule, AppInput, Evaluation, RuleVerdict, Status, VerdictEvidence};
pub use model::{
    Alternative, AnnotationField, Applicability, Authority, ComplianceRule, Condition,
    DataSafetyField, ExpectedState, InputKind, LegalSource, Op, RuleSet, Severity, ValueTest,
};

const BUILTIN: &str = include_str!("../../data/builtin_rules.json");

/// Examined app features and the built-in rules that check each one.
pub const FEATURE_COVERAGE: [(&str, &[&str]); 7] = [
    ("age-appropriate design", &["AGEAPP-01", "SHARE-U13-01"]),
    ("geolocation", &["GEO-U13-01"]),
    ("age verification", &["AGEVERIF-01"]),
    ("content reporting", &["REPORT-01"]),
    ("parental controls", &["PARENT-01"]),
    ("transparency", &["TRANS-01"]),
    ("policies and community standards", &["POLICY-01", "ERASE-01"]),
];

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("cannot read rule file {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("rule file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate rule id `{0}`")]
    DuplicateId(String),
    #[error("rule `{0}` has an empty violation condition")]
    EmptyViolation(String),
    #[error("rule `{0}` has an empty citation")]
    EmptyCitation(String),
    #[error("group `{group}`: members disagree on `{field}`")]
    GroupMismatch { group: String, field: &'static str },
    #[error("verdict for `{rule_id}`: record `{record}` and profile `{profile}` differ")]
    AppIdMismatch {
        rule_id: String,
        record: String,
        profile: String,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    id: String,
    title: String,
    severity: Severity,
    sources: Vec<LegalSource>,
    #[serde(default)]
    applies: Applicability,
    violation: Vec<Condition>,
    #[serde(default)]
    group: Option<String>,
    #[serde(default)]
    note: Option<String>,
}

/// The nine built-in rules.
pub fn builtin_rules() -> RuleSet {
    RuleSet {
        rules: parse_rule_file(BUILTIN).expect("built-in rules parse"),
    }
}

/// Built-ins, with any rules from `path` overriding them by id.
pub fn load_rules(path: Option<&Path>) -> Result<RuleSet, RuleError> {
    let mut set = builtin_rules();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|source| RuleError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        set.merge(parse_rule_file(&text)?);
    }
    Ok(set)
}

/// Parses a rule file. Entries sharing a `group` fold into one rule, in file order.
pub fn parse_rule_file(text: &str) -> Result<Vec<ComplianceRule>, RuleError> {
    let entries: Vec<RuleEntry> = serde_json::from_str(text).map_err(|e| RuleError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut ids = HashSet::new();
    let mut rules: Vec<ComplianceRule> = Vec::new();
    let mut groups: Vec<String> = Vec::new();
    for entry in entries {
        if !ids.insert(entry.id.clone()) {
            return Err(RuleError::DuplicateId(entry.id));
        }
        if entry.violation.is_empty() {
            return Err(RuleError::EmptyViolation(entry.id));
        }
        if entry.sources.iter().any(|s| s.citation.trim().is_empty()) {
            return Err(RuleError::EmptyCitation(entry.id));
        }
        let alternative = Alternative {
            id: entry.id.clone(),
            violation: entry.violation,
            note: entry.note,
        };
        let rule_id = entry.group.clone().unwrap_or_else(|| entry.id.clone());
        if let Some(group) = &entry.group {
            if let Some(rule) = rules.iter_mut().find(|r| &r.rule_id == group) {
                if !groups.contains(group) {
                    return Err(RuleError::DuplicateId(group.clone()));
                }
                if rule.severity != entry.severity {
                    return Err(RuleError::GroupMismatch {
                        group: group.clone(),
                        field: "severity",
                    });
                }
                if rule.applicability != entry.applies {
                    return Err(RuleError::GroupMismatch {
                        group: group.clone(),
                        field: "applies",
                    });
                }
                rule.alternatives.push(alternative);
                continue;
            }
            groups.push(group.clone());
        }
        if rules.iter().any(|r| r.rule_id == rule_id) {
            return Err(RuleError::DuplicateId(rule_id));
        }
        rules.push(ComplianceRule {
            rule_id,
            title: entry.title,
            legal_source: entry.sources,
            severity: entry.severity,
            applicability: entry.applies,
            alternatives: vec![alternative],
        });
    }
    Ok(rules)
}
