//! Store-metadata catalog: loading, age bands and sample-distribution tables.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detectors;

/// Key used for records without a country of origin.
pub const NULL_COUNTRY: &str = "<null>";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog file not found: {}", .0.display())]
    FileMissing(PathBuf),
    #[error("cannot read catalog {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("catalog parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("catalog schema error in entry {index}, field `{field}`: {message}")]
    Schema {
        index: usize,
        field: String,
        message: String,
    },
    #[error("duplicate app_id `{0}` in catalog")]
    DuplicateAppId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeRating {
    #[serde(rename = "Everyone")]
    Everyone,
    #[serde(rename = "Everyone 10+", alias = "Everyone10Plus")]
    Everyone10Plus,
    #[serde(rename = "Teen")]
    Teen,
    #[serde(rename = "Mature 17+", alias = "Mature17Plus")]
    Mature17Plus,
}

impl AgeRating {
    pub const ALL: [AgeRating; 4] = [
        AgeRating::Everyone,
        AgeRating::Everyone10Plus,
        AgeRating::Teen,
        AgeRating::Mature17Plus,
    ];

    /// Store display label, also used as the distribution key.
    pub fn label(self) -> &'static str {
        match self {
            AgeRating::Everyone => "Everyone",
            AgeRating::Everyone10Plus => "Everyone 10+",
            AgeRating::Teen => "Teen",
            AgeRating::Mature17Plus => "Mature 17+",
        }
    }
}

impl fmt::Display for AgeRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "Education")]
    Education,
    #[serde(rename = "Game")]
    Game,
    #[serde(rename = "Art & Design")]
    ArtAndDesign,
    #[serde(rename = "Health & Fitness")]
    HealthAndFitness,
    #[serde(rename = "Music & Audio")]
    MusicAndAudio,
    #[serde(rename = "Tools")]
    Tools,
    #[serde(rename = "Entertainment")]
    Entertainment,
    #[serde(rename = "Lifestyle")]
    Lifestyle,
    #[serde(rename = "Communication")]
    Communication,
    #[serde(rename = "Social")]
    Social,
    #[serde(rename = "Photography")]
    Photography,
    #[serde(rename = "Video Players & Editors")]
    VideoPlayersAndEditors,
}

impl Category {
    pub const ALL: [Category; 12] = [
        Category::Education,
        Category::Game,
        Category::ArtAndDesign,
        Category::HealthAndFitness,
        Category::MusicAndAudio,
        Category::Tools,
        Category::Entertainment,
        Category::Lifestyle,
        Category::Communication,
        Category::Social,
        Category::Photography,
        Category::VideoPlayersAndEditors,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::Education => "Education",
            Category::Game => "Game",
            Category::ArtAndDesign => "Art & Design",
            Category::HealthAndFitness => "Health & Fitness",
            Category::MusicAndAudio => "Music & Audio",
            Category::Tools => "Tools",
            Category::Entertainment => "Entertainment",
            Category::Lifestyle => "Lifestyle",
            Category::Communication => "Communication",
            Category::Social => "Social",
            Category::Photography => "Photography",
            Category::VideoPlayersAndEditors => "Video Players & Editors",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    Yes,
    No,
    Unknown,
}

/// Developer data-safety declaration from the store listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSafetyDecl {
    #[serde(rename = "collected")]
    pub data_collected: Vec<String>,
    #[serde(rename = "shared_third_party")]
    pub shared_with_third_parties: TriState,
    #[serde(rename = "erasure")]
    pub erasure_offered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppRecord {
    pub app_id: String,
    pub title: String,
    #[serde(rename = "link")]
    pub store_link: String,
    pub product_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serpapi_link: Option<String>,
    #[serde(rename = "thumbnail", default, skip_serializing_if = "Option::is_none")]
    pub thumbnail_link: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<f64>,
    pub age_rating: AgeRating,
    pub category: Category,
    #[serde(default)]
    pub country: Option<String>,
    #[serde(default)]
    pub teacher_approved: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_safety: Option<DataSafetyDecl>,
}

impl AppRecord {
    pub fn age_band(&self) -> AgeBand {
        classify_age_band(self.age_rating)
    }

    pub fn country_key(&self) -> &str {
        self.country.as_deref().unwrap_or(NULL_COUNTRY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeBand {
    Under13,
    ThirteenPlus,
}

impl AgeBand {
    pub const ALL: [AgeBand; 2] = [AgeBand::Under13, AgeBand::ThirteenPlus];
}

impl fmt::Display for AgeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgeBand::Under13 => "Under13",
            AgeBand::ThirteenPlus => "ThirteenPlus",
        })
    }
}

pub fn classify_age_band(rating: AgeRating) -> AgeBand {
    match rating {
        AgeRating::Everyone | AgeRating::Everyone10Plus => AgeBand::Under13,
        AgeRating::Teen | AgeRating::Mature17Plus => AgeBand::ThirteenPlus,
    }
}

const KNOWN_KEYS: &[&str] = &[
    "title",
    "link",
    "product_id",
    "serpapi_link",
    "thumbnail",
    "rating",
    "app_id",
    "age_rating",
    "category",
    "country",
    "teacher_approved",
    "data_safety",
];

/// Records parsed from a catalog document, plus non-fatal warnings.
#[derive(Debug, Clone, Default)]
pub struct ParsedCatalog {
    pub records: Vec<AppRecord>,
    pub warnings: Vec<String>,
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Vec<AppRecord>, CatalogError> {
    let parsed = load_catalog_with_warnings(path)?;
    for warning in &parsed.warnings {
        log::warn!("{warning}");
    }
    Ok(parsed.records)
}

pub fn load_catalog_with_warnings(path: impl AsRef<Path>) -> Result<ParsedCatalog, CatalogError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CatalogError::FileMissing(path.to_path_buf())
        } else {
            CatalogError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_catalog(&text)
}

pub fn parse_catalog(text: &str) -> Result<ParsedCatalog, CatalogError> {
    let entries: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| CatalogError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;

    let mut parsed = ParsedCatalog::default();
    let mut seen = HashSet::new();
    for (index, entry) in entries.into_iter().enumerate() {
        let object = entry.as_object().ok_or_else(|| CatalogError::Schema {
            index,
            field: "<entry>".into(),
            message: "expected a JSON object".into(),
        })?;
        for key in object.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                parsed
                    .warnings
                    .push(format!("catalog entry {index}: ignoring unknown key `{key}`"));
            }
        }
        let record = record_from_value(index, object)?;
        if !seen.insert(record.app_id.clone()) {
            return Err(CatalogError::DuplicateAppId(record.app_id));
        }
        parsed.records.push(record);
    }
    Ok(parsed)
}

fn record_from_value(
    index: usize,
    object: &serde_json::Map<String, serde_json::Value>,
) -> Result<AppRecord, CatalogError> {
    let schema = |field: &str, message: String| CatalogError::Schema {
        index,
        field: field.to_string(),
        message,
    };

    // Field-by-field so the error can name the offending key.
    let mut known = serde_json::Map::new();
    for key in KNOWN_KEYS {
        if let Some(value) = object.get(*key) {
            known.insert((*key).to_string(), value.clone());
        }
    }
    for key in ["app_id", "title", "link", "product_id", "age_rating", "category"] {
        match known.get(key) {
            None | Some(serde_json::Value::Null) => {
                return Err(schema(key, "required field is missing".into()))
            }
            _ => {}
        }
    }
    for key in KNOWN_KEYS {
        if let Some(value) = known.get(*key) {
            check_field(key, value).map_err(|m| schema(key, m))?;
        }
    }

    let record: AppRecord = serde_json::from_value(serde_json::Value::Object(known))
        .map_err(|e| schema("<entry>", e.to_string()))?;
    if let Some(rating) = record.rating {
        if !(0.0..=5.0).contains(&rating) {
            return Err(schema("rating", format!("{rating} is outside [0.0, 5.0]")));
        }
    }
    if record.app_id.is_empty() {
        return Err(schema("app_id", "must not be empty".into()));
    }
    if let Some(ds) = &record.data_safety {
        if ds.data_collected.iter().any(|c| c.is_empty() || c.to_lowercase() != *c) {
            return Err(schema(
                "data_safety",
                "collected entries must be non-empty lowercase strings".into(),
            ));
        }
    }
    Ok(record)
}

fn check_field(key: &str, value: &serde_json::Value) -> Result<(), String> {
    use serde_json::Value;
    let nullable = matches!(key, "serpapi_link" | "thumbnail" | "rating" | "country" | "data_safety");
    if nullable && value.is_null() {
        return Ok(());
    }
    match key {
        "rating" => value
            .as_f64()
            .map(|_| ())
            .ok_or_else(|| "expected a number".to_string()),
        "teacher_approved" => value
            .as_bool()
            .map(|_| ())
            .ok_or_else(|| "expected a boolean".to_string()),
        "age_rating" => serde_json::from_value::<AgeRating>(value.clone())
            .map(|_| ())
            .map_err(|_| format!("unknown age rating {value}")),
        "category" => serde_json::from_value::<Category>(value.clone())
            .map(|_| ())
            .map_err(|_| format!("unknown category {value}")),
        "data_safety" => serde_json::from_value::<DataSafetyDecl>(value.clone())
            .map(|_| ())
            .map_err(|e| e.to_string()),
        _ => match value {
            Value::String(_) => Ok(()),
            _ => Err("expected a string".to_string()),
        },
    }
}

/// True iff the store page mentions the "Teacher Approved" badge.
pub fn detect_teacher_approved(store_page: &str) -> bool {
    let tokens = detectors::normalize(store_page).tokens;
    tokens
        .windows(2)
        .any(|w| w[0] == "teacher" && w[1] == "approved")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dimension {
    AgeRating,
    Category,
    Country,
    CategoryByAgeRating,
    CountryByAgeRating,
}

impl Dimension {
    pub fn key_names(self) -> &'static [&'static str] {
        match self {
            Dimension::AgeRating => &["age_rating"],
            Dimension::Category => &["category"],
            Dimension::Country => &["country"],
            Dimension::CategoryByAgeRating => &["category", "age_rating"],
            Dimension::CountryByAgeRating => &["country", "age_rating"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub keys: Vec<String>,
    pub count: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub dimension: Dimension,
    pub total: usize,
    pub rows: Vec<DistributionRow>,
}

impl DistributionTable {
    pub fn count_of(&self, keys: &[&str]) -> usize {
        self.rows
            .iter()
            .find(|r| r.keys.iter().map(String::as_str).eq(keys.iter().copied()))
            .map_or(0, |r| r.count)
    }
}

/// `part / whole` as a percentage rounded half-up to one decimal place.
pub fn percentage_one_decimal(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        return 0.0;
    }
    let (part, whole) = (part as u128, whole as u128);
    let tenths = (part * 2000 + whole) / (2 * whole);
    tenths as f64 / 10.0
}

pub fn aggregate_distribution(records: &[AppRecord], dimension: Dimension) -> DistributionTable {
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for record in records {
        let rating = record.age_rating.label().to_string();
        let keys = match dimension {
            Dimension::AgeRating => vec![rating],
            Dimension::Category => vec![record.category.label().to_string()],
            Dimension::Country => vec![record.country_key().to_string()],
            Dimension::CategoryByAgeRating => {
                vec![record.category.label().to_string(), rating]
            }
            Dimension::CountryByAgeRating => vec![record.country_key().to_string(), rating],
        };
        *counts.entry(keys).or_default() += 1;
    }
    let total = records.len();
    let mut rows: Vec<DistributionRow> = counts
        .into_iter()
        .map(|(keys, count)| DistributionRow {
            keys,
            count,
            percentage: percentage_one_decimal(count, total),
        })
        .collect();
    // BTreeMap iteration already gives key order; a stable sort keeps it for ties.
    rows.sort_by_key(|r| std::cmp::Reverse(r.count));
    DistributionTable {
        dimension,
        total,
        rows,
    }
}
