use appaudit::catalog::{aggregate_distribution, AgeBand, Dimension};
use appaudit::detectors::Feature;
use appaudit::fixture::{audit_corpus, FixtureCorpus, DEFAULT_SEED};
use appaudit::report::ComplianceReport;
use appaudit::rules::Status;

fn generated() -> (FixtureCorpus, ComplianceReport) {
    let corpus = FixtureCorpus::generate(DEFAULT_SEED);
    let dir = tempfile::tempdir().unwrap();
    corpus.write(dir.path()).unwrap();
    let report = audit_corpus(&corpus, &dir.path().join("packages"), 4).unwrap();
    (corpus, report)
}

fn count(report: &ComplianceReport, f: Feature, band: AgeBand) -> (usize, usize, usize) {
    let c = report.aggregates.feature_count(f, band).unwrap();
    (c.detected, c.not_detected, c.not_evaluated)
}

#[test]
fn corpus_reproduces_feature_counts() {
    let (_, report) = generated();
    assert!(report.warnings.iter().all(|w| !w.contains("no package found")), "{:#?}", report.warnings);
    assert_eq!(count(&report, Feature::Geolocation, AgeBand::Under13), (6, 63, 0));
    assert_eq!(count(&report, Feature::Geolocation, AgeBand::ThirteenPlus), (4, 18, 0));
    assert_eq!(count(&report, Feature::ContentReporting, AgeBand::Under13), (4, 65, 0));
    assert_eq!(count(&report, Feature::ContentReporting, AgeBand::ThirteenPlus), (19, 3, 0));
    assert_eq!(count(&report, Feature::ParentalControls, AgeBand::Under13), (38, 31, 0));
    assert_eq!(count(&report, Feature::ParentalControls, AgeBand::ThirteenPlus), (3, 19, 0));
    assert_eq!(count(&report, Feature::AgeVerification, AgeBand::ThirteenPlus), (22, 0, 0));
}

#[test]
fn corpus_reproduces_rule_outcomes() {
    let (_, report) = generated();
    assert_eq!(report.indicated_apps("GEO-U13-01"), ["A60", "A62", "A63"]);
    assert_eq!(report.indicated_apps("SHARE-U13-01"), ["A43", "A47"]);
    assert_eq!(report.indicated_apps("AGEAPP-01"), ["A12", "A47", "A58", "A65"]);
    assert_eq!(
        report.indicated_apps("ERASE-01"),
        ["A05", "A23", "A24", "A25", "A43", "A44", "A46", "A52", "A70", "A89"]
    );
    assert!(report.indicated_apps("POLICY-01").is_empty());
    assert!(report.indicated_apps("AGEVERIF-01").is_empty());
    let erase = &report.aggregates.rule_counts["ERASE-01"];
    assert_eq!(erase.get(Status::InsufficientEvidence), 12);
    let a06 = &report.apps["A06"].verdicts;
    assert!(a06.iter().any(|v| v.rule_id == "ERASE-01" && v.status == Status::NoIssueFound));
}

#[test]
fn corpus_reproduces_catalog_tables() {
    let corpus = FixtureCorpus::generate(DEFAULT_SEED);
    let catalog = corpus.catalog();
    let t = aggregate_distribution(&catalog, Dimension::AgeRating);
    assert_eq!(t.count_of(&["Everyone"]), 68);
    assert_eq!(t.count_of(&["Everyone 10+"]), 1);
    assert_eq!(t.count_of(&["Teen"]), 14);
    assert_eq!(t.count_of(&["Mature 17+"]), 8);
    let c = aggregate_distribution(&catalog, Dimension::Category);
    assert_eq!(c.count_of(&["Education"]), 25);
    assert_eq!(c.count_of(&["Game"]), 25);
    assert_eq!(c.count_of(&["Social"]), 15);
    assert_eq!(c.count_of(&["Entertainment"]), 10);
    let k = aggregate_distribution(&catalog, Dimension::CountryByAgeRating);
    assert_eq!(k.count_of(&["United States", "Everyone"]), 21);
    assert_eq!(k.count_of(&["<null>", "Everyone"]), 4);
    assert_eq!(corpus.annotations().len(), 51);
}

fn committed(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn regenerated_corpus_matches_committed_snapshot() {
    let corpus = FixtureCorpus::generate(DEFAULT_SEED);
    assert_eq!(corpus.catalog_json(), committed("catalog.json"));
    assert_eq!(corpus.annotations_json(), committed("annotations.json"));
    let dir = tempfile::tempdir().unwrap();
    let report = appaudit::fixture::write_corpus(dir.path(), DEFAULT_SEED).unwrap();
    let json = String::from_utf8(appaudit::report::emit_json(&report)).unwrap();
    assert!(json == committed("expected_report.json"), "expected report drifted from the snapshot");
    assert_eq!(std::fs::read_to_string(dir.path().join("expected_report.json")).unwrap(), json);
}
