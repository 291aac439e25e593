use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{ComplianceReport, ReportError};
use crate::catalog::{AgeRating, Dimension, DistributionTable};
use crate::rules::Status;

/// Canonical pretty-printed JSON with a trailing newline.
pub fn emit_json(report: &ComplianceReport) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
    out.push(b'\n');
    out
}

pub fn parse_json(bytes: &[u8]) -> Result<ComplianceReport, ReportError> {
    Ok(serde_json::from_slice(bytes)?)
}

/// One row per listed verdict.
pub fn emit_csv(report: &ComplianceReport) -> Result<Vec<u8>, ReportError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "app_id",
        "title",
        "age_rating",
        "category",
        "rule_id",
        "severity",
        "status",
        "evidence_count",
        "rationale",
    ])?;
    for (app_id, app) in &report.apps {
        for v in &app.verdicts {
            writer.write_record([
                app_id.as_str(),
                app.record.title.as_str(),
                app.record.age_rating.label(),
                app.record.category.label(),
                v.rule_id.as_str(),
                &v.severity.to_string(),
                v.status.name(),
                &v.evidence.len().to_string(),
                v.rationale.as_str(),
            ])?;
        }
    }
    writer
        .into_inner()
        .map_err(|e| ReportError::Io(e.into_error()))
}

fn heading(dimension: Dimension) -> (&'static str, &'static str) {
    match dimension {
        Dimension::AgeRating => ("Age ratings", "Age rating"),
        Dimension::Category => ("Categories", "Category"),
        Dimension::Country => ("Countries", "Country"),
        Dimension::CategoryByAgeRating => ("Categories by age rating", "Category"),
        Dimension::CountryByAgeRating => ("Countries by age rating", "Country"),
    }
}

fn single_table(out: &mut String, table: &DistributionTable) {
    let (_, key) = heading(table.dimension);
    let _ = writeln!(out, "| {key} | Apps | Percentage |");
    out.push_str("|---|---:|---:|\n");
    for row in &table.rows {
        let _ = writeln!(out, "| {} | {} | {:.1}% |", row.keys[0], row.count, row.percentage);
    }
    let _ = writeln!(out, "| Total | {} | {:.1}% |", table.total, if table.total == 0 { 0.0 } else { 100.0 });
}

/// Pivots a (key, age rating) table into one column per rating.
fn pivot_table(out: &mut String, table: &DistributionTable) {
    let (_, key) = heading(table.dimension);
    let mut cells: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    for row in &table.rows {
        *cells
            .entry(row.keys[0].as_str())
            .or_default()
            .entry(row.keys[1].as_str())
            .or_default() += row.count;
    }
    let mut ordered: Vec<(&str, usize)> = cells
        .iter()
        .map(|(k, by)| (*k, by.values().sum()))
        .collect();
    ordered.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));

    let _ = write!(out, "| {key} |");
    for rating in AgeRating::ALL {
        let _ = write!(out, " {} |", rating.label());
    }
    out.push_str(" Total |\n|---|");
    out.push_str(&"---:|".repeat(AgeRating::ALL.len() + 1));
    out.push('\n');
    for (name, total) in ordered {
        let _ = write!(out, "| {name} |");
        for rating in AgeRating::ALL {
            match cells[name].get(rating.label()) {
                Some(n) => {
                    let _ = write!(out, " {n} |");
                }
                None => out.push_str("  |"),
            }
        }
        let _ = writeln!(out, " {total} |");
    }
}

/// One distribution table as markdown; two-key tables are pivoted by age rating.
pub fn emit_distribution_markdown(table: &DistributionTable) -> String {
    let mut out = String::new();
    if table.rows.first().is_some_and(|r| r.keys.len() == 2) {
        pivot_table(&mut out, table);
    } else {
        single_table(&mut out, table);
    }
    out
}

/// Human-readable summary: distribution tables, feature and rule counts, findings.
pub fn emit_markdown(report: &ComplianceReport) -> String {
    let mut out = String::new();
    out.push_str("# Compliance report\n\n");
    let _ = writeln!(out, "- Generated at: {}", report.meta.generated_at);
    let _ = writeln!(out, "- Tool version: {}", report.meta.tool_version);
    let _ = writeln!(out, "- Apps audited: {}\n", report.meta.corpus_size);

    for table in &report.aggregates.distributions {
        let (title, _) = heading(table.dimension);
        let _ = writeln!(out, "## {title}\n");
        out.push_str(&emit_distribution_markdown(table));
        out.push('\n');
    }

    out.push_str("## Features by age band\n\n");
    out.push_str("| Feature | Age band | Detected | Not detected | Not evaluated |\n");
    out.push_str("|---|---|---:|---:|---:|\n");
    for c in &report.aggregates.feature_counts {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            c.feature, c.age_band, c.detected, c.not_detected, c.not_evaluated
        );
    }

    out.push_str("\n## Rule outcomes\n\n");
    out.push_str("| Rule | Non-compliance indications | No issue found | Insufficient evidence | Not applicable |\n");
    out.push_str("|---|---:|---:|---:|---:|\n");
    for (rule_id, c) in &report.aggregates.rule_counts {
        let _ = writeln!(
            out,
            "| {rule_id} | {} | {} | {} | {} |",
            c.non_compliance, c.no_issue, c.insufficient, c.not_applicable
        );
    }

    out.push_str("\n## Findings\n\n");
    out.push_str("Verdicts are indications of possible non-compliance, not legal determinations.\n\n");
    let mut any = false;
    for (rule_id, counts) in &report.aggregates.rule_counts {
        if counts.get(Status::NonComplianceIndication) == 0 {
            continue;
        }
        any = true;
        let apps = report.indicated_apps(rule_id);
        let _ = writeln!(out, "- **{rule_id}** ({}): {}", apps.len(), apps.join(", "));
    }
    if !any {
        out.push_str("No non-compliance indications.\n");
    }

    if !report.warnings.is_empty() {
        out.push_str("\n## Warnings\n\n");
        for w in &report.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    out
}
