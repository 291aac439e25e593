//! Package containers (APK, XAPK, decoded directories) and the binary
//! resource formats inside them.

pub mod arsc;
pub mod axml;
pub mod chunk;
pub mod encode;
pub mod string_pool;
mod text;

use std::collections::BTreeMap;
use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use zip::ZipArchive;

pub use axml::{decode_axml, AttrValue, Attribute, Element, Namespace, Node, XmlDocument};
pub use string_pool::{parse_string_pool, StringEncoding, StringPool};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("truncated {what} at offset {offset}: need {needed} bytes, {available} available")]
    Truncated {
        what: &'static str,
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("bad chunk header at offset {offset}: type 0x{chunk_type:04x}, header {header_size}, size {chunk_size}")]
    BadChunkHeader {
        offset: usize,
        chunk_type: u16,
        header_size: u16,
        chunk_size: u32,
    },
    #[error("expected chunk type 0x{expected:04x} at offset {offset}, found 0x{found:04x}")]
    UnexpectedChunk {
        offset: usize,
        expected: u16,
        found: u16,
    },
    #[error("string index {index} out of bounds (pool has {len})")]
    StringIndexOutOfBounds { index: u32, len: usize },
    #[error("{what} out of range at offset {offset}")]
    OffsetOutOfRange { what: &'static str, offset: usize },
    #[error("unbalanced element nesting at offset {offset}: {detail}")]
    Unbalanced { offset: usize, detail: String },
    #[error("document references strings before any string pool")]
    MissingStringPool,
    #[error("document has no root element")]
    EmptyDocument,
}

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("{} does not exist", .0.display())]
    NotFound(PathBuf),
    #[error("{}: not a zip archive or package directory", .0.display())]
    NotAZip(PathBuf),
    #[error("{}: corrupt archive: {message}", path.display())]
    CorruptArchive { path: PathBuf, message: String },
    #[error("{}: bundle contains no inner .apk and no AndroidManifest.xml", .0.display())]
    XapkWithoutInnerApk(PathBuf),
    #[error("{}: directory has no AndroidManifest.xml", .0.display())]
    NotADecodedDir(PathBuf),
    #[error("{location}: AndroidManifest.xml is missing")]
    ManifestMissing { location: String },
    #[error("{location}: {source}")]
    Decode {
        location: String,
        #[source]
        source: DecodeError,
    },
    #[error("{location}: invalid XML: {message}")]
    TextXml { location: String, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PackageKind {
    Apk,
    Xapk,
    DecodedDir,
}

/// An APK archive held in memory.
#[derive(Debug, Clone)]
pub struct ApkArchive {
    pub name: String,
    bytes: Vec<u8>,
}

impl ApkArchive {
    fn open(&self) -> Result<ZipArchive<Cursor<&[u8]>>, ContainerError> {
        ZipArchive::new(Cursor::new(self.bytes.as_slice())).map_err(|e| {
            ContainerError::CorruptArchive {
                path: PathBuf::from(&self.name),
                message: e.to_string(),
            }
        })
    }

    /// Contents of a member, or `None` when the archive has no such entry.
    pub fn read(&self, entry: &str) -> Result<Option<Vec<u8>>, ContainerError> {
        let mut archive = self.open()?;
        let mut file = match archive.by_name(entry) {
            Ok(f) => f,
            Err(zip::result::ZipError::FileNotFound) => return Ok(None),
            Err(e) => {
                return Err(ContainerError::CorruptArchive {
                    path: PathBuf::from(&self.name),
                    message: e.to_string(),
                })
            }
        };
        let mut out = Vec::new();
        file.read_to_end(&mut out)
            .map_err(|e| ContainerError::CorruptArchive {
                path: PathBuf::from(&self.name),
                message: format!("{entry}: {e}"),
            })?;
        Ok(Some(out))
    }
}

#[derive(Debug, Clone)]
pub enum PackageSource {
    Apk(ApkArchive),
    Xapk {
        members: Vec<ApkArchive>,
        bundle_manifest: Option<String>,
    },
    DecodedDir(PathBuf),
}

impl PackageSource {
    pub fn kind(&self) -> PackageKind {
        match self {
            PackageSource::Apk(_) => PackageKind::Apk,
            PackageSource::Xapk { .. } => PackageKind::Xapk,
            PackageSource::DecodedDir(_) => PackageKind::DecodedDir,
        }
    }

    pub fn member_count(&self) -> usize {
        match self {
            PackageSource::Apk(_) | PackageSource::DecodedDir(_) => 1,
            PackageSource::Xapk { members, .. } => members.len(),
        }
    }
}

/// Opens a package, detecting its kind from content rather than extension.
pub fn open_package(path: impl AsRef<Path>) -> Result<PackageSource, ContainerError> {
    let path = path.as_ref();
    let meta = std::fs::metadata(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            ContainerError::NotFound(path.to_path_buf())
        } else {
            ContainerError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    if meta.is_dir() {
        if path.join("AndroidManifest.xml").is_file() {
            return Ok(PackageSource::DecodedDir(path.to_path_buf()));
        }
        return Err(ContainerError::NotADecodedDir(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|source| ContainerError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    open_package_bytes(&path.display().to_string(), bytes)
}

pub fn open_package_bytes(name: &str, bytes: Vec<u8>) -> Result<PackageSource, ContainerError> {
    let path = PathBuf::from(name);
    if !bytes.starts_with(b"PK") {
        return Err(ContainerError::NotAZip(path));
    }
    let names: Vec<String> = {
        let archive = ZipArchive::new(Cursor::new(bytes.as_slice())).map_err(|e| {
            ContainerError::CorruptArchive {
                path: path.clone(),
                message: e.to_string(),
            }
        })?;
        archive.file_names().map(str::to_string).collect()
    };
    let outer = ApkArchive {
        name: name.to_string(),
        bytes,
    };

    if names.iter().any(|n| n == "AndroidManifest.xml") {
        return Ok(PackageSource::Apk(outer));
    }

    // Keep archive order so the base split, written first, wins merges.
    let mut inner_names = Vec::new();
    {
        let mut archive = outer.open()?;
        for i in 0..archive.len() {
            let file = archive.by_index(i).map_err(|e| ContainerError::CorruptArchive {
                path: path.clone(),
                message: e.to_string(),
            })?;
            if file.is_file() && file.name().to_ascii_lowercase().ends_with(".apk") {
                inner_names.push(file.name().to_string());
            }
        }
    }
    if inner_names.is_empty() {
        return Err(ContainerError::XapkWithoutInnerApk(path));
    }
    let mut members = Vec::with_capacity(inner_names.len());
    for inner in inner_names {
        let bytes = outer.read(&inner)?.unwrap_or_default();
        members.push(ApkArchive {
            name: format!("{name}!{inner}"),
            bytes,
        });
    }
    let bundle_manifest = outer
        .read("manifest.json")?
        .map(|b| String::from_utf8_lossy(&b).into_owned());
    Ok(PackageSource::Xapk {
        members,
        bundle_manifest,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestDoc {
    pub package_id: String,
    /// Declared permissions, first occurrence order, no duplicates.
    pub permissions: Vec<String>,
    pub min_sdk: Option<i64>,
    pub target_sdk: Option<i64>,
    pub raw_attributes: Vec<RawAttribute>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAttribute {
    pub path: String,
    pub name: String,
    pub value: String,
}

impl ManifestDoc {
    pub fn from_document(doc: &XmlDocument) -> ManifestDoc {
        let mut manifest = ManifestDoc {
            package_id: doc
                .root
                .attr("package")
                .map(AttrValue::text)
                .unwrap_or_default(),
            ..ManifestDoc::default()
        };
        for (path, element) in doc.root.walk() {
            for a in &element.attributes {
                manifest.raw_attributes.push(RawAttribute {
                    path: path.clone(),
                    name: a.name.clone(),
                    value: a.value.text(),
                });
            }
            match element.name.as_str() {
                "uses-permission" | "uses-permission-sdk-23" => {
                    if let Some(name) = element.attr("name") {
                        manifest.add_permission(name.text());
                    }
                }
                "uses-sdk" => {
                    let int = |v: &AttrValue| match v {
                        AttrValue::Int(i) => Some(i64::from(*i)),
                        other => other.text().parse().ok(),
                    };
                    manifest.min_sdk = element.attr("minSdkVersion").and_then(int);
                    manifest.target_sdk = element.attr("targetSdkVersion").and_then(int);
                }
                _ => {}
            }
        }
        manifest
    }

    pub fn add_permission(&mut self, name: String) {
        if !self.permissions.contains(&name) {
            self.permissions.push(name);
        }
    }

    /// Folds another split's manifest into this one.
    pub fn merge(&mut self, other: ManifestDoc) {
        if self.package_id.is_empty() {
            self.package_id = other.package_id;
        }
        for p in other.permissions {
            self.add_permission(p);
        }
        self.min_sdk = self.min_sdk.or(other.min_sdk);
        self.target_sdk = self.target_sdk.or(other.target_sdk);
        self.raw_attributes.extend(other.raw_attributes);
    }
}

pub fn extract_manifest(source: &PackageSource) -> Result<ManifestDoc, ContainerError> {
    match source {
        PackageSource::Apk(apk) => manifest_of_apk(apk),
        PackageSource::Xapk { members, .. } => {
            let mut merged: Option<ManifestDoc> = None;
            for member in members {
                let doc = manifest_of_apk(member)?;
                match merged.as_mut() {
                    Some(m) => m.merge(doc),
                    None => merged = Some(doc),
                }
            }
            Ok(merged.unwrap_or_default())
        }
        PackageSource::DecodedDir(dir) => {
            let path = dir.join("AndroidManifest.xml");
            let text = std::fs::read_to_string(&path).map_err(|source| ContainerError::Io {
                path: path.clone(),
                source,
            })?;
            let doc = text::parse_text_xml(&text).map_err(|message| ContainerError::TextXml {
                location: path.display().to_string(),
                message,
            })?;
            Ok(ManifestDoc::from_document(&doc))
        }
    }
}

fn manifest_of_apk(apk: &ApkArchive) -> Result<ManifestDoc, ContainerError> {
    let bytes = apk
        .read("AndroidManifest.xml")?
        .ok_or_else(|| ContainerError::ManifestMissing {
            location: apk.name.clone(),
        })?;
    let mut warnings = Vec::new();
    let doc = axml::decode_axml_with(&bytes, &mut warnings).map_err(|source| {
        ContainerError::Decode {
            location: format!("{}!AndroidManifest.xml", apk.name),
            source,
        }
    })?;
    for w in warnings {
        log::warn!("{}: {w}", apk.name);
    }
    Ok(ManifestDoc::from_document(&doc))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Arsc { member: String },
    StringsXml { path: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceString {
    pub value: String,
    pub provenance: Provenance,
}

/// User-facing string resources keyed by (locale, name); `""` is the default locale.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceTable {
    pub entries: BTreeMap<(String, String), ResourceString>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ResourceTable {
    /// Inserts unless the key is already present.
    pub fn insert_first(&mut self, locale: &str, name: &str, value: ResourceString) -> bool {
        let key = (locale.to_string(), name.to_string());
        if self.entries.contains_key(&key) {
            return false;
        }
        self.entries.insert(key, value);
        true
    }

    pub fn get(&self, locale: &str, name: &str) -> Option<&str> {
        self.entries
            .get(&(locale.to_string(), name.to_string()))
            .map(|r| r.value.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn low_string_yield(&self) -> bool {
        self.entries.is_empty()
    }

    /// Key-wise merge in which existing entries win.
    pub fn merge_first_wins(&mut self, other: ResourceTable) {
        for (key, value) in other.entries {
            self.entries.entry(key).or_insert(value);
        }
        self.warnings.extend(other.warnings);
    }
}

pub fn extract_string_resources(source: &PackageSource) -> ResourceTable {
    match source {
        PackageSource::Apk(apk) => strings_of_apk(apk),
        PackageSource::Xapk { members, .. } => {
            let mut table = ResourceTable::default();
            for member in members {
                table.merge_first_wins(strings_of_apk(member));
            }
            table
        }
        PackageSource::DecodedDir(dir) => text::strings_of_dir(dir),
    }
}

fn strings_of_apk(apk: &ApkArchive) -> ResourceTable {
    let mut table = ResourceTable::default();
    let bytes = match apk.read("resources.arsc") {
        Ok(Some(b)) => b,
        Ok(None) => return table,
        Err(e) => {
            table.warnings.push(e.to_string());
            return table;
        }
    };
    let mut warnings = Vec::new();
    match arsc::decode_resource_strings(&bytes, &mut warnings) {
        Ok(strings) => {
            for s in strings {
                table.insert_first(
                    &s.locale,
                    &s.name,
                    ResourceString {
                        value: s.value,
                        provenance: Provenance::Arsc {
                            member: apk.name.clone(),
                        },
                    },
                );
            }
        }
        Err(e) => warnings.push(format!("{}!resources.arsc: {e}", apk.name)),
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    table.warnings = warnings;
    table
}

#[cfg(test)]
mod tests {
    use super::encode::*;
    use super::*;

    fn manifest_bytes(package: &str, permissions: &[&str]) -> Vec<u8> {
        let mut root = Element::new("manifest");
        root.attributes.push(Attribute {
            namespace: None,
            name: "package".into(),
            value: AttrValue::String(package.into()),
        });
        let mut sdk = Element::new("uses-sdk");
        sdk.attributes.push(Attribute {
            namespace: Some(axml::ANDROID_NS.into()),
            name: "minSdkVersion".into(),
            value: AttrValue::Int(21),
        });
        root.children.push(Node::Element(sdk));
        for p in permissions {
            let mut e = Element::new("uses-permission");
            e.attributes.push(Attribute {
                namespace: Some(axml::ANDROID_NS.into()),
                name: "name".into(),
                value: AttrValue::String((*p).into()),
            });
            root.children.push(Node::Element(e));
        }
        encode_axml(
            &XmlDocument {
                namespaces: vec![Namespace {
                    prefix: "android".into(),
                    uri: axml::ANDROID_NS.into(),
                }],
                root,
            },
            StringEncoding::Utf16,
        )
    }

    #[test]
    fn apk_detected_by_content() {
        let apk = build_apk(&manifest_bytes("com.x", &[]), None);
        let source = open_package_bytes("x.bin", apk).unwrap();
        assert_eq!(source.kind(), PackageKind::Apk);
    }

    #[test]
    fn xapk_with_two_members() {
        let a = build_apk(&manifest_bytes("com.x", &["android.permission.INTERNET"]), None);
        let b = build_apk(
            &manifest_bytes("com.x", &["android.permission.ACCESS_FINE_LOCATION"]),
            None,
        );
        let bundle = build_xapk(
            "com.x",
            &[("com.x.apk".into(), a), ("config.en.apk".into(), b)],
        );
        let source = open_package_bytes("x.xapk", bundle).unwrap();
        assert_eq!(source.kind(), PackageKind::Xapk);
        assert_eq!(source.member_count(), 2);
        let manifest = extract_manifest(&source).unwrap();
        assert_eq!(manifest.package_id, "com.x");
        assert_eq!(
            manifest.permissions,
            [
                "android.permission.INTERNET",
                "android.permission.ACCESS_FINE_LOCATION"
            ]
        );
    }

    #[test]
    fn not_a_zip() {
        assert!(matches!(
            open_package_bytes("notes.txt", b"hello world".to_vec()),
            Err(ContainerError::NotAZip(_))
        ));
        assert!(matches!(
            open_package_bytes("bad.apk", b"PK\x03\x04garbage".to_vec()),
            Err(ContainerError::CorruptArchive { .. })
        ));
    }

    #[test]
    fn zip_without_manifest_or_apks() {
        let z = build_zip(&[("readme.txt", b"hi")]);
        assert!(matches!(
            open_package_bytes("x.xapk", z),
            Err(ContainerError::XapkWithoutInnerApk(_))
        ));
    }

    #[test]
    fn duplicate_permission_appears_once() {
        let perms = [
            "android.permission.CAMERA",
            "android.permission.INTERNET",
            "android.permission.CAMERA",
        ];
        let apk = build_apk(&manifest_bytes("com.x", &perms), None);
        let manifest = extract_manifest(&open_package_bytes("x.apk", apk).unwrap()).unwrap();
        // brute-force: keep each name whose first index is its own index
        let expected: Vec<&str> = perms
            .iter()
            .enumerate()
            .filter(|(i, p)| perms.iter().position(|q| q == *p) == Some(*i))
            .map(|(_, p)| *p)
            .collect();
        assert_eq!(manifest.permissions, expected);
        assert_eq!(manifest.min_sdk, Some(21));
    }

    #[test]
    fn no_permissions() {
        let apk = build_apk(&manifest_bytes("com.x", &[]), None);
        let manifest = extract_manifest(&open_package_bytes("x.apk", apk).unwrap()).unwrap();
        assert!(manifest.permissions.is_empty());
    }

    #[test]
    fn corrupt_manifest_is_a_decode_error() {
        let apk = build_apk(b"\x03\x00\x08\x00\xff\x00\x00\x00", None);
        let err = extract_manifest(&open_package_bytes("x.apk", apk).unwrap()).unwrap_err();
        assert!(matches!(err, ContainerError::Decode { .. }), "{err}");
    }

    #[test]
    fn apk_without_strings_is_low_yield() {
        let apk = build_apk(&manifest_bytes("com.x", &[]), None);
        let table = extract_string_resources(&open_package_bytes("x.apk", apk).unwrap());
        assert!(table.is_empty());
        assert!(table.low_string_yield());
    }

    #[test]
    fn xapk_strings_first_member_wins() {
        let m = manifest_bytes("com.x", &[]);
        let a = build_apk(
            &m,
            Some(&encode_arsc(
                "com.x",
                &[ArscEntry::new("", "title", "Base"), ArscEntry::new("", "only_a", "A")],
            )),
        );
        let b = build_apk(
            &m,
            Some(&encode_arsc(
                "com.x",
                &[ArscEntry::new("", "title", "Split"), ArscEntry::new("fr", "only_b", "B")],
            )),
        );
        let source = open_package_bytes(
            "x.xapk",
            build_xapk("com.x", &[("a.apk".into(), a), ("b.apk".into(), b)]),
        )
        .unwrap();
        let table = extract_string_resources(&source);
        assert_eq!(table.get("", "title"), Some("Base"));
        assert_eq!(table.get("", "only_a"), Some("A"));
        assert_eq!(table.get("fr", "only_b"), Some("B"));
        assert_eq!(table.len(), 3);
    }
}
