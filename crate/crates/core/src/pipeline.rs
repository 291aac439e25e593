//! End-to-end audit: catalog, packages, detectors, annotations, rules, report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::annotations::{validate_annotations, AnnotationMap, ValidationFinding};
use crate::catalog::{aggregate_distribution, AppRecord, Dimension};
use crate::container::{
    extract_manifest, extract_string_resources, open_package, ContainerError, PackageSource,
};
use crate::detectors::{build_feature_profile, Detectors, FeatureProfile, StoreFlags};
use crate::report::{build_report, ComplianceReport, ReportError, ReportOptions};
use crate::rules::{evaluate_all, AppInput, RuleSet};

/// Tables included in every report.
pub const REPORT_DIMENSIONS: [Dimension; 4] = [
    Dimension::AgeRating,
    Dimension::Category,
    Dimension::CategoryByAgeRating,
    Dimension::CountryByAgeRating,
];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read package directory {}: {source}", path.display())]
    PackageDir {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Result of scanning one package.
#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub profile: FeatureProfile,
    pub package_id: String,
    pub warnings: Vec<String>,
}

/// Decodes a package and runs every detector over it.
pub fn scan_package(
    app_id: &str,
    source: &PackageSource,
    store: StoreFlags,
    detectors: &Detectors,
) -> Result<ScanOutcome, ContainerError> {
    let manifest = extract_manifest(source)?;
    let resources = extract_string_resources(source);
    let warnings = resources
        .warnings
        .iter()
        .map(|w| format!("{app_id}: {w}"))
        .collect();
    let profile = build_feature_profile(app_id, Some(&manifest), Some(&resources), store, detectors);
    Ok(ScanOutcome {
        profile,
        package_id: manifest.package_id,
        warnings,
    })
}

pub fn scan_path(
    app_id: &str,
    path: &Path,
    store: StoreFlags,
    detectors: &Detectors,
) -> Result<ScanOutcome, ContainerError> {
    scan_package(app_id, &open_package(path)?, store, detectors)
}

/// `<app_id>.apk`, `<app_id>.xapk` or a `<app_id>/` decoded directory.
pub fn locate_package(dir: &Path, app_id: &str) -> Option<PathBuf> {
    [format!("{app_id}.apk"), format!("{app_id}.xapk"), app_id.to_string()]
        .into_iter()
        .map(|name| dir.join(name))
        .find(|p| p.exists())
}

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub package_dir: PathBuf,
    pub workers: usize,
    pub verbose: bool,
    pub generated_at: String,
    /// Join packages to records by manifest package id when no file matches the app id.
    pub package_id_fallback: bool,
}

impl AuditConfig {
    pub fn new(package_dir: impl Into<PathBuf>) -> AuditConfig {
        AuditConfig {
            package_dir: package_dir.into(),
            workers: 1,
            verbose: false,
            generated_at: timestamp_from_env(),
            package_id_fallback: true,
        }
    }
}

/// RFC 3339 timestamp from `SOURCE_DATE_EPOCH` when set, else the current time.
pub fn timestamp_from_env() -> String {
    let epoch = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    epoch
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Debug)]
pub struct AuditInputs<'a> {
    pub catalog: &'a [AppRecord],
    pub catalog_warnings: &'a [String],
    pub annotations: &'a AnnotationMap,
    pub rules: &'a RuleSet,
    pub detectors: &'a Detectors,
}

/// Packages in `dir` not named after any catalog app, keyed by manifest package id.
fn package_id_index(
    dir: &Path,
    catalog: &[AppRecord],
    warnings: &mut Vec<String>,
) -> Result<BTreeMap<String, PathBuf>, PipelineError> {
    let named: Vec<PathBuf> = catalog
        .iter()
        .filter_map(|r| locate_package(dir, &r.app_id))
        .collect();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| PipelineError::PackageDir {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| !named.contains(p))
        .collect();
    entries.sort();
    let mut index = BTreeMap::new();
    for path in entries {
        let Ok(source) = open_package(&path) else {
            continue;
        };
        match extract_manifest(&source) {
            Ok(m) if !m.package_id.is_empty() => {
                index.entry(m.package_id).or_insert(path);
            }
            Ok(_) => {}
            Err(e) => warnings.push(format!("{}: {e}", path.display())),
        }
    }
    Ok(index)
}

pub fn audit(inputs: &AuditInputs<'_>, config: &AuditConfig) -> Result<ComplianceReport, PipelineError> {
    let dir = &config.package_dir;
    if !dir.is_dir() {
        let source = std::fs::read_dir(dir)
            .err()
            .unwrap_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"));
        return Err(PipelineError::PackageDir {
            path: dir.clone(),
            source,
        });
    }

    let mut warnings: Vec<String> = inputs.catalog_warnings.to_vec();
    let missing: Vec<&AppRecord> = inputs
        .catalog
        .iter()
        .filter(|r| locate_package(dir, &r.app_id).is_none())
        .collect();
    let fallback = if config.package_id_fallback && !missing.is_empty() {
        package_id_index(dir, inputs.catalog, &mut warnings)?
    } else {
        BTreeMap::new()
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()?;
    let scanned: Vec<(FeatureProfile, Vec<String>)> = pool.install(|| {
        inputs
            .catalog
            .par_iter()
            .map(|record| {
                let id = &record.app_id;
                let store = StoreFlags {
                    teacher_approved: record.teacher_approved,
                };
                let path = locate_package(dir, id).or_else(|| fallback.get(&record.product_id).cloned());
                let Some(path) = path else {
                    let profile = build_feature_profile(id, None, None, store, inputs.detectors);
                    return (profile, vec![format!("{id}: no package found")]);
                };
                match scan_path(id, &path, store, inputs.detectors) {
                    Ok(outcome) => {
                        let mut w = outcome.warnings;
                        if !outcome.package_id.is_empty() && outcome.package_id != record.product_id {
                            w.push(format!(
                                "{id}: manifest package `{}` differs from catalog product_id `{}`",
                                outcome.package_id, record.product_id
                            ));
                        }
                        (outcome.profile, w)
                    }
                    Err(e) => {
                        let profile = build_feature_profile(id, None, None, store, inputs.detectors);
                        (profile, vec![format!("{id}: {e}")])
                    }
                }
            })
            .collect()
    });

    let mut profiles = Vec::with_capacity(scanned.len());
    for (profile, w) in scanned {
        profiles.push(profile);
        warnings.extend(w);
    }

    let findings = validate_annotations(inputs.annotations, inputs.catalog);
    let unannotated = findings
        .iter()
        .filter(|f| matches!(f, ValidationFinding::MissingAnnotation(_)))
        .count();
    for f in &findings {
        if let ValidationFinding::UnknownAppId(_) = f {
            warnings.push(f.message());
        }
    }
    if unannotated > 0 {
        warnings.push(format!(
            "{unannotated} of {} apps have no review annotation",
            inputs.catalog.len()
        ));
    }

    let app_inputs: Vec<AppInput<'_>> = inputs
        .catalog
        .iter()
        .zip(&profiles)
        .map(|(record, profile)| AppInput {
            record,
            profile,
            annotation: inputs.annotations.get(&record.app_id),
        })
        .collect();
    let evaluation = evaluate_all(inputs.rules, &app_inputs, true);
    warnings.extend(evaluation.errors.iter().map(ToString::to_string));

    let distributions = REPORT_DIMENSIONS
        .iter()
        .map(|d| aggregate_distribution(inputs.catalog, *d))
        .collect();
    let options = ReportOptions {
        generated_at: config.generated_at.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        verbose: config.verbose,
    };
    Ok(build_report(
        inputs.catalog,
        &profiles,
        &evaluation.verdicts,
        distributions,
        &options,
    )?)
}
