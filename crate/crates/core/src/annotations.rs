//! Findings recorded by human reviewers of an app's terms and privacy documents.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{AppRecord, TriState};

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("cannot read annotations {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("annotation parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate annotation for app_id `{0}`")]
    DuplicateAppId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Transparency {
    Transparent,
    Partial,
    Opaque,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewAnnotation {
    pub app_id: String,
    pub transparency: Transparency,
    pub child_friendly_language: bool,
    pub third_party_sharing: TriState,
    pub declared_no_data_collection: bool,
    pub erasure_promised: TriState,
    pub contact_email_present: bool,
    #[serde(default)]
    pub notes: String,
    pub reviewed_on: NaiveDate,
}

pub type AnnotationMap = BTreeMap<String, ReviewAnnotation>;

pub fn load_annotations(path: impl AsRef<Path>) -> Result<AnnotationMap, AnnotationError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AnnotationError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_annotations(&text)
}

pub fn parse_annotations(text: &str) -> Result<AnnotationMap, AnnotationError> {
    let list: Vec<ReviewAnnotation> =
        serde_json::from_str(text).map_err(|e| AnnotationError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let mut map = AnnotationMap::new();
    for annotation in list {
        let id = annotation.app_id.clone();
        if map.insert(id.clone(), annotation).is_some() {
            return Err(AnnotationError::DuplicateAppId(id));
        }
    }
    Ok(map)
}

/// Serializes annotations as the JSON array accepted by [`parse_annotations`].
pub fn annotations_to_json(annotations: &AnnotationMap) -> String {
    let list: Vec<&ReviewAnnotation> = annotations.values().collect();
    serde_json::to_string_pretty(&list).expect("annotations serialize")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "app_id", rename_all = "snake_case")]
pub enum ValidationFinding {
    /// An annotation whose app_id is not in the catalog.
    UnknownAppId(String),
    /// A catalog app with no annotation. Informational only.
    MissingAnnotation(String),
}

impl ValidationFinding {
    pub fn message(&self) -> String {
        match self {
            ValidationFinding::UnknownAppId(id) => {
                format!("annotation for `{id}` does not match any catalog app")
            }
            ValidationFinding::MissingAnnotation(id) => {
                format!("no review annotation for `{id}`; annotation-based rules report insufficient evidence")
            }
        }
    }
}

/// Orphan annotations first, then unannotated apps in catalog order.
pub fn validate_annotations(annotations: &AnnotationMap, catalog: &[AppRecord]) -> Vec<ValidationFinding> {
    let ids: BTreeSet<&str> = catalog.iter().map(|r| r.app_id.as_str()).collect();
    let mut findings: Vec<ValidationFinding> = annotations
        .keys()
        .filter(|id| !ids.contains(id.as_str()))
        .map(|id| ValidationFinding::UnknownAppId(id.clone()))
        .collect();
    findings.extend(
        catalog
            .iter()
            .filter(|r| !annotations.contains_key(&r.app_id))
            .map(|r| ValidationFinding::MissingAnnotation(r.app_id.clone())),
    );
    findings
}
