//! Seeded synthetic corpus of 91 apps: catalog, store pages, packages and
//! review annotations, shaped so that auditing it reproduces known counts.

mod words;

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::annotations::{annotations_to_json, AnnotationMap, ReviewAnnotation, Transparency};
use crate::catalog::{
    detect_teacher_approved, AgeBand, AgeRating, AppRecord, Category, DataSafetyDecl, TriState,
};
use crate::container::axml::{AttrValue, Attribute, Element, Namespace, Node, XmlDocument, ANDROID_NS};
use crate::container::encode::{build_apk, build_xapk, encode_arsc, encode_axml, ArscEntry};
use crate::container::StringEncoding;
use crate::detectors::{Detectors, Feature, CONTENT_REPORT_PHRASES};
use crate::pipeline::{audit, AuditConfig, AuditInputs, PipelineError};
use crate::report::{emit_json, ComplianceReport};
use crate::rules::builtin_rules;

pub const DEFAULT_SEED: u64 = 20_230_502;

/// Timestamp written into the committed expected report.
pub const SNAPSHOT_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

/// Country key for apps whose country has no row in the published table.
pub const UNLISTED_COUNTRY: &str = "<unlisted>";

const LAYOUT: &[(AgeRating, Category, &str)] = &[
    (AgeRating::Everyone, Category::Education, "1-8,10,11,13-15,17-25,27,28,31"),
    (AgeRating::Everyone, Category::Game, "29,30,32-38,41-55"),
    (AgeRating::Everyone10Plus, Category::Game, "56"),
    (AgeRating::Everyone, Category::ArtAndDesign, "57-59"),
    (AgeRating::Everyone, Category::HealthAndFitness, "60"),
    (AgeRating::Everyone, Category::MusicAndAudio, "61"),
    (AgeRating::Everyone, Category::Tools, "62"),
    (AgeRating::Everyone, Category::Entertainment, "9,12,16,26,40,63,64"),
    (AgeRating::Everyone, Category::Lifestyle, "65"),
    (AgeRating::Everyone, Category::Communication, "66,67,69"),
    (AgeRating::Everyone, Category::Social, "71"),
    (AgeRating::Everyone, Category::VideoPlayersAndEditors, "72"),
    (AgeRating::Teen, Category::Entertainment, "39,73"),
    (AgeRating::Teen, Category::Communication, "70,74"),
    (AgeRating::Teen, Category::Social, "68,75-82"),
    (AgeRating::Teen, Category::Photography, "83"),
    (AgeRating::Mature17Plus, Category::Entertainment, "84"),
    (AgeRating::Mature17Plus, Category::Lifestyle, "85"),
    (AgeRating::Mature17Plus, Category::Communication, "86"),
    (AgeRating::Mature17Plus, Category::Social, "87-91"),
];

const EVERYONE_COUNTRIES: &[(&str, usize)] = &[
    ("<null>", 4),
    ("Argentina", 1),
    ("Austria", 1),
    ("Brazil", 1),
    ("British Virgin Islands", 1),
    ("Canada", 5),
    ("China", 1),
    ("Denmark", 2),
    ("France", 4),
    ("Germany", 1),
    ("Hong Kong", 2),
    ("Ireland", 2),
    ("Netherlands", 1),
    ("New Zealand", 1),
    ("Pakistan", 2),
    ("Romania", 1),
    ("Saint Helena", 1),
    ("Sweden", 2),
    ("United Arab Emirates", 7),
    ("United Kingdom", 5),
    ("United States", 21),
    (UNLISTED_COUNTRY, 2),
];
const EVERYONE_10_COUNTRIES: &[(&str, usize)] = &[("Czech Republic", 1)];
const TEEN_COUNTRIES: &[(&str, usize)] = &[
    ("France", 2),
    ("Germany", 1),
    ("Latvia", 1),
    ("New Zealand", 1),
    ("Russia", 1),
    ("Singapore", 1),
    ("South Korea", 1),
    ("United States", 6),
];
const MATURE_COUNTRIES: &[(&str, usize)] = &[
    ("<null>", 1),
    ("Ireland", 1),
    ("Singapore", 1),
    ("Turkey", 1),
    ("United Arab Emirates", 1),
    ("United States", 3),
];
const PINNED_COUNTRIES: &[(u32, &str)] = &[(20, "United States"), (31, "France"), (40, "Pakistan")];

/// Apps whose developers declare collected data with no erasure procedure.
pub const NO_ERASURE_APPS: &[(u32, &str)] = &[
    (5, "Location, app activity, app info and performance, device and other IDs."),
    (23, "Name, email address, user IDs, phone number, emails, app activity, app info and performance, device or other IDs"),
    (24, "Name, email address, user IDs, phone number, emails, app activity, app info and performance, device or other IDs."),
    (25, "App activity"),
    (43, "App activity, app info and performance."),
    (44, "Location, app activity, device or other IDs"),
    (46, "Location, app activity, device or other IDs."),
    (52, "App info, performance"),
    (70, "Email address and phone number, messages, photos and videos, contacts, app activity, app info and performance, device or other IDs."),
    (89, "Location, email address financial info, messages, photos and videos, app activity, app info and performance, device & other IDs"),
];
/// Declares collected data and an erasure procedure.
pub const ERASURE_CONTROL_APP: u32 = 6;
const NO_DATA_SAFETY: &str = "14,17,21,28,35,49,53,59,61,64,75,82";

const GEOLOCATION: &str = "60,62,63,66,67,69,70,76,86,89";
const CONTENT_REPORTING_U13: &str = "66,67,71,72";
const NO_CONTENT_REPORTING_13: &str = "80,81,91";
const PARENTAL_13: &str = "68,83,85";
const TEACHER_APPROVED_GAMES: &str = "29,30,32-38";
const NOT_TEACHER_APPROVED_EDUCATION: &str = "5,23,24,25,31";

/// Under-13 apps reviewed as using child-friendly language.
const REVIEWED_CHILD_FRIENDLY: &str = "1-8,10,11,23-25,44,46,52,60,62,66,67";
/// Under-13 apps without the badge whose documents are not child-friendly.
pub const NOT_AGE_APPROPRIATE: &[u32] = &[12, 47, 58, 65];

pub fn parse_ids(ranges: &str) -> Vec<u32> {
    let mut out = Vec::new();
    for part in ranges.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (a.parse().expect("id"), b.parse().expect("id"));
                out.extend(a..=b);
            }
            None => out.push(part.parse().expect("id")),
        }
    }
    out
}

fn id_set(ranges: &str) -> BTreeSet<u32> {
    parse_ids(ranges).into_iter().collect()
}

pub fn app_id(n: u32) -> String {
    format!("A{n:02}")
}

/// Parses a printed "types of data collected" cell into lowercase entries.
pub fn parse_collected(printed: &str) -> Vec<String> {
    printed
        .trim()
        .trim_end_matches('.')
        .split(',')
        .map(|s| s.trim().to_lowercase())
        .filter(|s| !s.is_empty())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainerKind {
    Apk,
    Xapk,
    DecodedDir,
}

/// Which detectable features an app's package carries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeaturePlan {
    pub geolocation: bool,
    pub age_verification: bool,
    pub content_reporting: bool,
    pub parental_controls: bool,
}

impl FeaturePlan {
    pub fn has(&self, feature: Feature) -> Option<bool> {
        match feature {
            Feature::Geolocation => Some(self.geolocation),
            Feature::AgeVerification => Some(self.age_verification),
            Feature::ContentReporting => Some(self.content_reporting),
            Feature::ParentalControls => Some(self.parental_controls),
            Feature::TeacherApproved => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResString {
    pub locale: String,
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone)]
pub struct FixtureApp {
    pub number: u32,
    pub record: AppRecord,
    pub plan: FeaturePlan,
    pub container: ContainerKind,
    /// File or directory name under `packages/`.
    pub package_name: String,
    pub permissions: Vec<String>,
    /// Strings in the base package.
    pub strings: Vec<ResString>,
    /// Strings placed only in an XAPK config split.
    pub split_strings: Vec<ResString>,
    pub store_page: String,
    pub annotation: Option<ReviewAnnotation>,
}

#[derive(Debug, Clone)]
pub struct FixtureCorpus {
    pub seed: u64,
    pub apps: Vec<FixtureApp>,
}

fn layout() -> BTreeMap<u32, (AgeRating, Category)> {
    let mut map = BTreeMap::new();
    for (rating, category, ids) in LAYOUT {
        for n in parse_ids(ids) {
            let previous = map.insert(n, (*rating, *category));
            assert!(previous.is_none(), "A{n:02} placed twice");
        }
    }
    assert_eq!(map.len(), 91);
    assert_eq!(map.keys().copied().collect::<Vec<_>>(), (1..=91).collect::<Vec<_>>());
    map
}

fn expand(pool: &[(&str, usize)]) -> Vec<Option<String>> {
    pool.iter()
        .flat_map(|(name, n)| {
            let value = (*name != crate::catalog::NULL_COUNTRY).then(|| name.to_string());
            std::iter::repeat_n(value, *n)
        })
        .collect()
}

fn countries(layout: &BTreeMap<u32, (AgeRating, Category)>, rng: &mut ChaCha8Rng) -> BTreeMap<u32, Option<String>> {
    let mut out = BTreeMap::new();
    for (rating, pool) in [
        (AgeRating::Everyone, EVERYONE_COUNTRIES),
        (AgeRating::Everyone10Plus, EVERYONE_10_COUNTRIES),
        (AgeRating::Teen, TEEN_COUNTRIES),
        (AgeRating::Mature17Plus, MATURE_COUNTRIES),
    ] {
        let mut pool = expand(pool);
        let mut ids: Vec<u32> = layout
            .iter()
            .filter(|(_, (r, _))| *r == rating)
            .map(|(n, _)| *n)
            .collect();
        for (n, country) in PINNED_COUNTRIES {
            if let Some(pos) = ids.iter().position(|i| i == n) {
                ids.remove(pos);
                let slot = pool
                    .iter()
                    .position(|c| c.as_deref() == Some(*country))
                    .expect("pinned country in pool");
                out.insert(*n, pool.remove(slot));
            }
        }
        assert_eq!(pool.len(), ids.len(), "{rating} country pool size");
        pool.shuffle(rng);
        out.extend(ids.into_iter().zip(pool));
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, list: &'a [&'a str]) -> &'a str {
    list[rng.gen_range(0..list.len())]
}

fn filler_sentence(rng: &mut ChaCha8Rng) -> String {
    let s = format!(
        "{} the {} {} and {} a {} {}.",
        pick(rng, words::VERBS),
        pick(rng, words::ADJECTIVES),
        pick(rng, words::NOUNS),
        pick(rng, words::VERBS),
        pick(rng, words::ADJECTIVES),
        pick(rng, words::NOUNS),
    );
    capitalize(&s)
}

/// Rotating pickers over each detector's phrase list.
struct PhraseRotation {
    lists: BTreeMap<Feature, Vec<String>>,
    next: BTreeMap<Feature, usize>,
}

impl PhraseRotation {
    fn new(detectors: &Detectors) -> PhraseRotation {
        let mut lists = BTreeMap::new();
        lists.insert(
            Feature::ContentReporting,
            CONTENT_REPORT_PHRASES.iter().map(|s| s.to_string()).collect(),
        );
        for f in [Feature::AgeVerification, Feature::ParentalControls] {
            let set = detectors.keywords(f).expect("string detector");
            lists.insert(f, set.expanded_phrases.iter().map(ToString::to_string).collect());
        }
        PhraseRotation {
            lists,
            next: BTreeMap::new(),
        }
    }

    fn take(&mut self, feature: Feature) -> String {
        let list = &self.lists[&feature];
        let i = self.next.entry(feature).or_default();
        let phrase = list[*i % list.len()].clone();
        *i += 1;
        phrase
    }
}

impl FixtureCorpus {
    pub fn generate(seed: u64) -> FixtureCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = layout();
        let countries = countries(&layout, &mut rng);
        let detectors = Detectors::default();
        let mut rotation = PhraseRotation::new(&detectors);

        let education: Vec<u32> = layout
            .iter()
            .filter(|(_, (_, c))| *c == Category::Education)
            .map(|(n, _)| *n)
            .collect();
        let everyone_games: Vec<u32> = layout
            .iter()
            .filter(|(_, (r, c))| *c == Category::Game && *r == AgeRating::Everyone)
            .map(|(n, _)| *n)
            .collect();
        let parental_u13: BTreeSet<u32> = education[..20]
            .iter()
            .chain(&everyone_games[..18])
            .copied()
            .collect();
        let geolocation = id_set(GEOLOCATION);
        let cr_u13 = id_set(CONTENT_REPORTING_U13);
        let no_cr_13 = id_set(NO_CONTENT_REPORTING_13);
        let parental_13 = id_set(PARENTAL_13);
        let teacher_games = id_set(TEACHER_APPROVED_GAMES);
        let not_teacher_edu = id_set(NOT_TEACHER_APPROVED_EDUCATION);
        let no_data_safety = id_set(NO_DATA_SAFETY);
        let no_erasure: BTreeMap<u32, &str> = NO_ERASURE_APPS.iter().copied().collect();

        let mut used_titles = BTreeSet::new();
        let mut used_packages = BTreeSet::new();
        let mut apps = Vec::new();
        for (&n, &(age_rating, category)) in &layout {
            let id = app_id(n);
            let band = crate::catalog::classify_age_band(age_rating);
            let under13 = band == AgeBand::Under13;
            let plan = FeaturePlan {
                geolocation: geolocation.contains(&n),
                content_reporting: if under13 { cr_u13.contains(&n) } else { !no_cr_13.contains(&n) },
                parental_controls: if under13 {
                    parental_u13.contains(&n)
                } else {
                    parental_13.contains(&n)
                },
                age_verification: !under13 || n % 7 == 0,
            };
            let teacher_approved = match category {
                Category::Education => !not_teacher_edu.contains(&n),
                Category::Game => teacher_games.contains(&n),
                _ => false,
            };

            let (title, studio) = loop {
                let title = format!(
                    "{} {} {}",
                    capitalize(pick(&mut rng, words::ADJECTIVES)),
                    capitalize(pick(&mut rng, words::NOUNS)),
                    pick(&mut rng, words::title_suffixes(category)),
                );
                let studio = pick(&mut rng, words::STUDIOS);
                if used_titles.insert(title.clone()) {
                    break (title, studio);
                }
            };
            let slug: String = title
                .to_lowercase()
                .chars()
                .filter(char::is_ascii_alphanumeric)
                .collect();
            let product_id = format!("com.{studio}.{slug}");
            assert!(used_packages.insert(product_id.clone()));

            let rating = if rng.gen_ratio(1, 7) {
                None
            } else {
                Some(f64::from(rng.gen_range(25..=49_u32)) / 10.0)
            };

            let data_safety = if no_data_safety.contains(&n) {
                None
            } else if let Some(printed) = no_erasure.get(&n) {
                Some(DataSafetyDecl {
                    data_collected: parse_collected(printed),
                    shared_with_third_parties: TriState::Unknown,
                    erasure_offered: false,
                })
            } else if n == ERASURE_CONTROL_APP {
                Some(DataSafetyDecl {
                    data_collected: parse_collected("App activity, app info and performance"),
                    shared_with_third_parties: TriState::No,
                    erasure_offered: true,
                })
            } else if n == 31 {
                Some(DataSafetyDecl {
                    data_collected: Vec::new(),
                    shared_with_third_parties: TriState::No,
                    erasure_offered: false,
                })
            } else {
                let erasure_offered = n == 40 || rng.gen_bool(0.6);
                let mut data_collected = Vec::new();
                if erasure_offered {
                    let mut types = words::DATA_TYPES.to_vec();
                    types.shuffle(&mut rng);
                    let k = rng.gen_range(1..=3);
                    data_collected = types[..k].iter().map(|s| s.to_string()).collect();
                    data_collected.sort();
                }
                let shared_with_third_parties = match (under13, rng.gen_range(0..3)) {
                    (false, 0) => TriState::Yes,
                    (_, 1) => TriState::No,
                    _ => TriState::Unknown,
                };
                Some(DataSafetyDecl {
                    data_collected,
                    shared_with_third_parties,
                    erasure_offered,
                })
            };

            let container = if n % 9 == 0 {
                ContainerKind::Xapk
            } else if n % 13 == 0 {
                ContainerKind::DecodedDir
            } else {
                ContainerKind::Apk
            };
            let package_name = match container {
                // One package is named by its manifest package id to exercise the fallback join.
                ContainerKind::Apk if n == 34 => format!("{product_id}.apk"),
                ContainerKind::Apk => format!("{id}.apk"),
                ContainerKind::Xapk => format!("{id}.xapk"),
                ContainerKind::DecodedDir => id.clone(),
            };

            let mut permissions: Vec<String> = {
                let mut base = words::BASE_PERMISSIONS.to_vec();
                base.shuffle(&mut rng);
                let k = rng.gen_range(1..=4);
                base[..k].iter().map(|s| s.to_string()).collect()
            };
            if plan.geolocation {
                let k = rng.gen_range(1..=2);
                permissions.extend(words::LOCATION_PERMISSIONS[..k].iter().map(|s| s.to_string()));
            }
            permissions.sort();

            let mut strings = vec![ResString {
                locale: String::new(),
                name: "app_name".into(),
                value: title.clone(),
            }];
            for i in 0..rng.gen_range(4..=7) {
                let name = format!("{}_{}_{i}", pick(&mut rng, words::NOUNS), pick(&mut rng, words::VERBS));
                let value = filler_sentence(&mut rng);
                strings.push(ResString {
                    locale: String::new(),
                    name: name.clone(),
                    value,
                });
                if i == 0 && n % 3 == 0 {
                    strings.push(ResString {
                        locale: "de".into(),
                        name,
                        value: format!("{} (de)", filler_sentence(&mut rng)),
                    });
                }
            }
            let feature_locale = if n % 5 == 0 { "fr" } else { "" };
            let mut feature_strings = Vec::new();
            let mut add = |name: String, value: String| {
                feature_strings.push(ResString {
                    locale: feature_locale.to_string(),
                    name,
                    value,
                })
            };
            if plan.content_reporting {
                let phrase = rotation.take(Feature::ContentReporting);
                add("menu_flag_item".into(), capitalize(&phrase));
            }
            if plan.age_verification {
                let phrase = rotation.take(Feature::AgeVerification);
                add("gate_title".into(), format!("{} needed", capitalize(&phrase)));
            }
            if plan.parental_controls {
                let phrase = rotation.take(Feature::ParentalControls);
                if n % 4 == 3 {
                    add("parentalconsent_screen_title".into(), "Ask a grown-up".into());
                } else {
                    add("settings_family_title".into(), capitalize(&phrase));
                }
            }
            let split_strings = if container == ContainerKind::Xapk {
                feature_strings
            } else {
                strings.extend(feature_strings);
                Vec::new()
            };

            let description: Vec<String> = (0..3).map(|_| filler_sentence(&mut rng)).collect();
            let store_page = store_page(&title, studio, rating, teacher_approved, &description);
            assert_eq!(detect_teacher_approved(&store_page), teacher_approved);

            let record = AppRecord {
                app_id: id.clone(),
                title,
                store_link: format!("https://play.google.com/store/apps/details?id={product_id}"),
                product_id: product_id.clone(),
                serpapi_link: Some(format!(
                    "https://serpapi.com/search.json?engine=google_play_product&product_id={product_id}&store=apps"
                )),
                thumbnail_link: Some(format!("https://play-lh.googleusercontent.com/{slug}={n}")),
                rating,
                age_rating,
                category,
                country: countries[&n].clone(),
                teacher_approved,
                data_safety,
            };

            apps.push(FixtureApp {
                number: n,
                record,
                plan,
                container,
                package_name,
                permissions,
                strings,
                split_strings,
                store_page,
                annotation: None,
            });
        }

        annotate(&mut apps, &mut rng);
        FixtureCorpus { seed, apps }
    }

    pub fn catalog(&self) -> Vec<AppRecord> {
        self.apps.iter().map(|a| a.record.clone()).collect()
    }

    pub fn annotations(&self) -> AnnotationMap {
        self.apps
            .iter()
            .filter_map(|a| a.annotation.clone())
            .map(|a| (a.app_id.clone(), a))
            .collect()
    }

    pub fn catalog_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.catalog()).expect("catalog serializes");
        s.push('\n');
        s
    }

    pub fn annotations_json(&self) -> String {
        let mut s = annotations_to_json(&self.annotations());
        s.push('\n');
        s
    }

    /// Writes `catalog.json`, `annotations.json`, `store_pages/` and `packages/`.
    pub fn write(&self, out_dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(out_dir)?;
        std::fs::write(out_dir.join("catalog.json"), self.catalog_json())?;
        std::fs::write(out_dir.join("annotations.json"), self.annotations_json())?;
        let pages = out_dir.join("store_pages");
        let packages = out_dir.join("packages");
        std::fs::create_dir_all(&pages)?;
        std::fs::create_dir_all(&packages)?;
        for app in &self.apps {
            std::fs::write(pages.join(format!("{}.html", app.record.app_id)), &app.store_page)?;
            write_package(app, &packages)?;
        }
        Ok(())
    }
}

fn annotate(apps: &mut [FixtureApp], rng: &mut ChaCha8Rng) {
    let child_friendly = id_set(REVIEWED_CHILD_FRIENDLY);
    let special: BTreeMap<u32, (Transparency, bool, &str)> = [
        (9, (Transparency::Opaque, true, "Lacks details on personal data storage and processing.")),
        (12, (Transparency::Opaque, false, "Dense legal wording aimed at adults.")),
        (20, (Transparency::Transparent, true, "Guest users need no personal information; network data is anonymised.")),
        (31, (Transparency::Opaque, true, "Only states that no user data is collected.")),
        (40, (Transparency::Partial, true, "Child submissions refused or deleted; no professional contact email.")),
        (43, (Transparency::Transparent, true, "Colourful wording explains collection and third-party sharing.")),
        (47, (Transparency::Partial, false, "Technical wording; data may be shared with partners.")),
        (58, (Transparency::Opaque, false, "Technical wording with no section for children.")),
        (65, (Transparency::Partial, false, "Generic adult-oriented policy.")),
        (68, (Transparency::Transparent, false, "Technical but complete; includes a children's section and consent steps.")),
    ]
    .into_iter()
    .collect();

    let mut reviewed: Vec<u32> = apps
        .iter()
        .filter(|a| {
            a.record.age_band() == AgeBand::ThirteenPlus
                || child_friendly.contains(&a.number)
                || special.contains_key(&a.number)
        })
        .map(|a| a.number)
        .collect();
    assert_eq!(reviewed.len(), 51);
    let mut others: Vec<u32> = reviewed
        .iter()
        .copied()
        .filter(|n| !special.contains_key(n))
        .collect();
    others.shuffle(rng);
    let mut transparency: BTreeMap<u32, Transparency> = BTreeMap::new();
    for (i, n) in others.iter().enumerate() {
        let t = match i {
            0..=16 => Transparency::Transparent,
            17..=30 => Transparency::Partial,
            _ => Transparency::Opaque,
        };
        transparency.insert(*n, t);
    }
    reviewed.sort();

    let start = NaiveDate::from_ymd_opt(2022, 11, 1).expect("date");
    for app in apps.iter_mut() {
        let n = app.number;
        if reviewed.binary_search(&n).is_err() {
            continue;
        }
        let under13 = app.record.age_band() == AgeBand::Under13;
        let (level, friendly, notes) = match special.get(&n) {
            Some((t, f, notes)) => (*t, *f, notes.to_string()),
            None => (
                transparency[&n],
                if under13 { true } else { rng.gen_bool(0.3) },
                String::new(),
            ),
        };
        let third_party_sharing = if n == 43 || n == 47 {
            TriState::Yes
        } else {
            match (under13, rng.gen_range(0..3)) {
                (false, 0) => TriState::Yes,
                (_, 1) => TriState::No,
                _ => TriState::Unknown,
            }
        };
        let erasure_offered = app.record.data_safety.as_ref().is_some_and(|d| d.erasure_offered);
        let erasure_promised = if n == 40 || (erasure_offered && rng.gen_bool(0.5)) {
            TriState::Yes
        } else if rng.gen_bool(0.5) {
            TriState::No
        } else {
            TriState::Unknown
        };
        app.annotation = Some(ReviewAnnotation {
            app_id: app.record.app_id.clone(),
            transparency: level,
            child_friendly_language: friendly,
            third_party_sharing,
            declared_no_data_collection: n == 31,
            erasure_promised,
            contact_email_present: !(n == 31 || n == 40) && rng.gen_bool(0.8),
            notes,
            reviewed_on: start + Days::new(rng.gen_range(0..120)),
        });
    }
}

fn store_page(title: &str, studio: &str, rating: Option<f64>, teacher: bool, description: &[String]) -> String {
    let mut page = String::new();
    page.push_str("<!DOCTYPE html>\n<html lang=\"en-GB\">\n<head><meta charset=\"utf-8\">");
    page.push_str(&format!("<title>{title} - Apps on Google Play</title></head>\n<body>\n"));
    page.push_str(&format!("<h1 itemprop=\"name\">{title}</h1>\n<div class=\"dev\">{studio}</div>\n"));
    if teacher {
        page.push_str("<div class=\"badge\" aria-label=\"Teacher Approved\"><span>Teacher Approved</span></div>\n");
    }
    if let Some(r) = rating {
        page.push_str(&format!("<div class=\"stars\">{r:.1}</div>\n"));
    }
    page.push_str("<section class=\"about\">\n");
    for line in description {
        page.push_str(&format!("<p>{line}</p>\n"));
    }
    page.push_str("</section>\n</body>\n</html>\n");
    page
}

fn android_attr(name: &str, value: AttrValue) -> Attribute {
    Attribute {
        namespace: Some(ANDROID_NS.to_string()),
        name: name.to_string(),
        value,
    }
}

fn element(name: &str, attributes: Vec<Attribute>, children: Vec<Element>) -> Element {
    Element {
        namespace: None,
        name: name.to_string(),
        attributes,
        children: children.into_iter().map(Node::Element).collect(),
    }
}

fn manifest_document(package: &str, permissions: &[String], split: Option<&str>) -> XmlDocument {
    let mut attributes = vec![
        android_attr("versionCode", AttrValue::Int(7)),
        android_attr("versionName", AttrValue::String("1.4.2".into())),
        Attribute {
            namespace: None,
            name: "package".into(),
            value: AttrValue::String(package.into()),
        },
    ];
    let mut children = Vec::new();
    if let Some(split) = split {
        attributes.push(Attribute {
            namespace: None,
            name: "split".into(),
            value: AttrValue::String(split.into()),
        });
    } else {
        children.push(element(
            "uses-sdk",
            vec![
                android_attr("minSdkVersion", AttrValue::Int(21)),
                android_attr("targetSdkVersion", AttrValue::Int(33)),
            ],
            Vec::new(),
        ));
        for p in permissions {
            children.push(element(
                "uses-permission",
                vec![android_attr("name", AttrValue::String(p.clone()))],
                Vec::new(),
            ));
        }
        let activity = element(
            "activity",
            vec![
                android_attr("name", AttrValue::String(".MainActivity".into())),
                android_attr("exported", AttrValue::Bool(true)),
            ],
            Vec::new(),
        );
        children.push(element(
            "application",
            vec![
                android_attr("label", AttrValue::Reference(0x7f0b_0000)),
                android_attr("allowBackup", AttrValue::Bool(false)),
            ],
            vec![activity],
        ));
    }
    XmlDocument {
        namespaces: vec![Namespace {
            prefix: "android".into(),
            uri: ANDROID_NS.into(),
        }],
        root: element("manifest", attributes, children),
    }
}

fn arsc(package: &str, strings: &[ResString]) -> Vec<u8> {
    let entries: Vec<ArscEntry> = strings
        .iter()
        .map(|s| ArscEntry::new(&s.locale, &s.name, &s.value))
        .collect();
    encode_arsc(package, &entries)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('\'', "\\'")
        .replace('"', "\\\"")
}

fn text_manifest(package: &str, permissions: &[String]) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"utf-8\" standalone=\"no\"?>\n");
    s.push_str(&format!(
        "<manifest xmlns:android=\"{ANDROID_NS}\" android:versionCode=\"7\" android:versionName=\"1.4.2\" package=\"{package}\">\n"
    ));
    s.push_str("    <uses-sdk android:minSdkVersion=\"21\" android:targetSdkVersion=\"33\"/>\n");
    for p in permissions {
        s.push_str(&format!("    <uses-permission android:name=\"{p}\"/>\n"));
    }
    s.push_str("    <application android:allowBackup=\"false\" android:label=\"@string/app_name\">\n");
    s.push_str("        <activity android:exported=\"true\" android:name=\".MainActivity\"/>\n");
    s.push_str("    </application>\n</manifest>\n");
    s
}

fn write_package(app: &FixtureApp, packages: &Path) -> io::Result<()> {
    let package = &app.record.product_id;
    let encoding = if app.number.is_multiple_of(2) {
        StringEncoding::Utf8
    } else {
        StringEncoding::Utf16
    };
    match app.container {
        ContainerKind::Apk => {
            let manifest = encode_axml(&manifest_document(package, &app.permissions, None), encoding);
            let table = arsc(package, &app.strings);
            std::fs::write(packages.join(&app.package_name), build_apk(&manifest, Some(&table)))
        }
        ContainerKind::Xapk => {
            let base_manifest = encode_axml(&manifest_document(package, &app.permissions, None), encoding);
            let base = build_apk(&base_manifest, Some(&arsc(package, &app.strings)));
            let split_manifest = encode_axml(&manifest_document(package, &[], Some("config.strings")), encoding);
            let split = build_apk(&split_manifest, Some(&arsc(package, &app.split_strings)));
            let bundle = build_xapk(
                package,
                &[
                    (format!("{package}.apk"), base),
                    ("config.strings.apk".to_string(), split),
                ],
            );
            std::fs::write(packages.join(&app.package_name), bundle)
        }
        ContainerKind::DecodedDir => {
            let root = packages.join(&app.package_name);
            std::fs::create_dir_all(&root)?;
            std::fs::write(root.join("AndroidManifest.xml"), text_manifest(package, &app.permissions))?;
            let mut by_locale: BTreeMap<&str, Vec<&ResString>> = BTreeMap::new();
            for s in &app.strings {
                by_locale.entry(s.locale.as_str()).or_default().push(s);
            }
            for (locale, strings) in by_locale {
                let dir = if locale.is_empty() {
                    root.join("res/values")
                } else {
                    root.join(format!("res/values-{locale}"))
                };
                std::fs::create_dir_all(&dir)?;
                let mut xml = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<resources>\n");
                for s in strings {
                    xml.push_str(&format!(
                        "    <string name=\"{}\">{}</string>\n",
                        s.name,
                        xml_escape(&s.value)
                    ));
                }
                xml.push_str("</resources>\n");
                std::fs::write(dir.join("strings.xml"), xml)?;
            }
            Ok(())
        }
    }
}

/// Paths inside a written corpus directory.
#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub catalog: PathBuf,
    pub annotations: PathBuf,
    pub packages: PathBuf,
    pub store_pages: PathBuf,
}

impl CorpusPaths {
    pub fn new(root: &Path) -> CorpusPaths {
        CorpusPaths {
            catalog: root.join("catalog.json"),
            annotations: root.join("annotations.json"),
            packages: root.join("packages"),
            store_pages: root.join("store_pages"),
        }
    }
}

/// Audits a generated corpus with the built-in rules and fixed timestamp.
pub fn audit_corpus(corpus: &FixtureCorpus, packages: &Path, workers: usize) -> Result<ComplianceReport, PipelineError> {
    let catalog = corpus.catalog();
    let annotations = corpus.annotations();
    let rules = builtin_rules();
    let detectors = Detectors::default();
    let inputs = AuditInputs {
        catalog: &catalog,
        catalog_warnings: &[],
        annotations: &annotations,
        rules: &rules,
        detectors: &detectors,
    };
    let mut config = AuditConfig::new(packages);
    config.workers = workers;
    config.generated_at = SNAPSHOT_TIMESTAMP.to_string();
    audit(&inputs, &config)
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot write fixture corpus: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Writes the corpus plus `expected_report.json`, the single-worker audit of it.
pub fn write_corpus(out_dir: &Path, seed: u64) -> Result<ComplianceReport, FixtureError> {
    let corpus = FixtureCorpus::generate(seed);
    corpus.write(out_dir)?;
    let report = audit_corpus(&corpus, &CorpusPaths::new(out_dir).packages, 1)?;
    std::fs::write(out_dir.join("expected_report.json"), emit_json(&report))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{match_phrases, normalize};

    #[test]
    fn id_ranges() {
        assert_eq!(parse_ids("1-3,7"), [1, 2, 3, 7]);
        assert_eq!(layout().len(), 91);
    }

    #[test]
    fn collected_cells() {
        assert_eq!(
            parse_collected("Location, app activity, app info and performance, device and other IDs."),
            ["location", "app activity", "app info and performance", "device and other ids"]
        );
        assert_eq!(parse_collected("App activity"), ["app activity"]);
    }

    #[test]
    fn filler_words_never_match() {
        let detectors = Detectors::default();
        let mut all: Vec<&str> = Vec::new();
        all.extend(words::ADJECTIVES);
        all.extend(words::NOUNS);
        all.extend(words::VERBS);
        all.extend(words::STUDIOS);
        let text = normalize(&all.join(" "));
        for f in [Feature::AgeVerification, Feature::ContentReporting, Feature::ParentalControls] {
            let set = detectors.keywords(f).unwrap();
            for word in &text.tokens {
                assert!(set.expanded_phrases.iter().all(|p| !p.tokens().contains(word)), "{word} in {f}");
            }
            assert!(match_phrases(&text, set).is_empty());
        }
        let geo = detectors.keywords(Feature::Geolocation).unwrap();
        for p in words::BASE_PERMISSIONS {
            assert!(match_phrases(&normalize(p), geo).is_empty(), "{p}");
        }
    }

    #[test]
    fn deterministic() {
        let a = FixtureCorpus::generate(DEFAULT_SEED);
        let b = FixtureCorpus::generate(DEFAULT_SEED);
        assert_eq!(a.catalog_json(), b.catalog_json());
        assert_eq!(a.annotations_json(), b.annotations_json());
    }
}
