//! Plain-text XML as found in already-decoded resource directories.

use std::path::Path;

use super::axml::{AttrValue, Attribute, Element, Namespace, Node, XmlDocument};
use super::{Provenance, ResourceString, ResourceTable};

pub(crate) fn parse_text_xml(text: &str) -> Result<XmlDocument, String> {
    let doc = roxmltree::Document::parse(text).map_err(|e| e.to_string())?;
    let root = doc.root_element();
    let namespaces = root
        .namespaces()
        .map(|ns| Namespace {
            prefix: ns.name().unwrap_or_default().to_string(),
            uri: ns.uri().to_string(),
        })
        .collect();
    Ok(XmlDocument {
        namespaces,
        root: convert(root),
    })
}

fn convert(node: roxmltree::Node<'_, '_>) -> Element {
    let name = node.tag_name();
    let mut element = Element {
        namespace: name.namespace().map(str::to_string),
        name: name.name().to_string(),
        attributes: node
            .attributes()
            .map(|a| Attribute {
                namespace: a.namespace().map(str::to_string),
                name: a.name().to_string(),
                value: AttrValue::String(a.value().to_string()),
            })
            .collect(),
        children: Vec::new(),
    };
    for child in node.children() {
        if child.is_element() {
            element.children.push(Node::Element(convert(child)));
        } else if child.is_text() {
            if let Some(t) = child.text() {
                if !t.trim().is_empty() {
                    element.children.push(Node::Text(t.to_string()));
                }
            }
        }
    }
    element
}

/// Locale from a `values[-qualifier...]` directory name; `None` if the
/// directory is not a values directory.
pub(crate) fn locale_of_values_dir(dir_name: &str) -> Option<String> {
    let rest = dir_name.strip_prefix("values")?;
    if rest.is_empty() {
        return Some(String::new());
    }
    let rest = rest.strip_prefix('-')?;
    let mut parts = rest.split('-').peekable();
    while let Some(part) = parts.next() {
        if let Some(tag) = part.strip_prefix("b+") {
            return Some(format!("b+{tag}"));
        }
        let is_language = (2..=3).contains(&part.len())
            && part.chars().all(|c| c.is_ascii_lowercase())
            && !matches!(part, "car" | "hdr" | "any");
        if is_language {
            let mut locale = part.to_string();
            if let Some(region) = parts.peek() {
                let is_region = region.len() == 3
                    && region.starts_with('r')
                    && region[1..].chars().all(|c| c.is_ascii_uppercase());
                if is_region {
                    locale.push('-');
                    locale.push_str(region);
                }
            }
            return Some(locale);
        }
    }
    // Only non-locale qualifiers (night, v21, land, ...): default locale.
    Some(String::new())
}

/// Undoes the escaping used in compiled-then-decoded string values.
fn unescape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    let trimmed = out.trim();
    trimmed
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(trimmed)
        .to_string()
}

fn element_text(node: roxmltree::Node<'_, '_>) -> String {
    node.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect()
}

pub(crate) fn strings_of_dir(dir: &Path) -> ResourceTable {
    let mut table = ResourceTable::default();
    let res = dir.join("res");
    let mut values_dirs: Vec<(String, std::path::PathBuf)> = match std::fs::read_dir(&res) {
        Ok(entries) => entries
            .filter_map(Result::ok)
            .filter(|e| e.path().is_dir())
            .filter_map(|e| {
                let name = e.file_name().to_string_lossy().into_owned();
                locale_of_values_dir(&name).map(|_| (name, e.path()))
            })
            .collect(),
        Err(_) => return table,
    };
    // "values" sorts before every "values-*" so default strings are read first.
    values_dirs.sort();

    for (dir_name, path) in values_dirs {
        let locale = locale_of_values_dir(&dir_name).unwrap_or_default();
        let file = path.join("strings.xml");
        if !file.is_file() {
            continue;
        }
        let text = match std::fs::read_to_string(&file) {
            Ok(t) => t,
            Err(e) => {
                table.warnings.push(format!("{}: {e}", file.display()));
                continue;
            }
        };
        let doc = match roxmltree::Document::parse(&text) {
            Ok(d) => d,
            Err(e) => {
                table.warnings.push(format!("{}: {e}", file.display()));
                continue;
            }
        };
        let rel = file
            .strip_prefix(dir)
            .unwrap_or(&file)
            .display()
            .to_string();
        for node in doc.root_element().children().filter(|n| n.has_tag_name("string")) {
            let Some(name) = node.attribute("name") else {
                continue;
            };
            table.insert_first(
                &locale,
                name,
                ResourceString {
                    value: unescape(&element_text(node)),
                    provenance: Provenance::StringsXml { path: rel.clone() },
                },
            );
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::{extract_manifest, extract_string_resources, open_package, PackageKind};

    #[test]
    fn values_qualifiers() {
        assert_eq!(locale_of_values_dir("values").as_deref(), Some(""));
        assert_eq!(locale_of_values_dir("values-fr").as_deref(), Some("fr"));
        assert_eq!(locale_of_values_dir("values-fr-rCA").as_deref(), Some("fr-rCA"));
        assert_eq!(locale_of_values_dir("values-night").as_deref(), Some(""));
        assert_eq!(locale_of_values_dir("values-de-v21").as_deref(), Some("de"));
        assert_eq!(locale_of_values_dir("values-b+sr+Latn").as_deref(), Some("b+sr+Latn"));
        assert_eq!(locale_of_values_dir("drawable"), None);
        assert_eq!(locale_of_values_dir("valuesx"), None);
    }

    #[test]
    fn unescaping() {
        assert_eq!(unescape(r"Don\'t stop"), "Don't stop");
        assert_eq!(unescape("\"quoted\""), "quoted");
    }

    #[test]
    fn decoded_directory() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        std::fs::write(
            root.join("AndroidManifest.xml"),
            r#"<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="com.decoded">
    <uses-sdk android:minSdkVersion="19" android:targetSdkVersion="33"/>
    <uses-permission android:name="android.permission.ACCESS_COARSE_LOCATION"/>
</manifest>"#,
        )
        .unwrap();
        std::fs::create_dir_all(root.join("res/values")).unwrap();
        std::fs::create_dir_all(root.join("res/values-fr")).unwrap();
        std::fs::create_dir_all(root.join("res/values-es")).unwrap();
        std::fs::write(
            root.join("res/values/strings.xml"),
            r#"<resources><string name="btn_report">Report this user</string><string name="styled">Tap <b>here</b></string></resources>"#,
        )
        .unwrap();
        std::fs::write(
            root.join("res/values-fr/strings.xml"),
            r#"<resources><string name="btn_report">Signaler cet utilisateur</string></resources>"#,
        )
        .unwrap();
        std::fs::write(root.join("res/values-es/strings.xml"), "<resources><unclosed>").unwrap();

        let source = open_package(root).unwrap();
        assert_eq!(source.kind(), PackageKind::DecodedDir);
        let manifest = extract_manifest(&source).unwrap();
        assert_eq!(manifest.package_id, "com.decoded");
        assert_eq!(manifest.permissions, ["android.permission.ACCESS_COARSE_LOCATION"]);
        assert_eq!(manifest.min_sdk, Some(19));
        assert_eq!(manifest.target_sdk, Some(33));

        let table = extract_string_resources(&source);
        assert_eq!(table.get("", "btn_report"), Some("Report this user"));
        assert_eq!(table.get("", "styled"), Some("Tap here"));
        assert_eq!(table.get("fr", "btn_report"), Some("Signaler cet utilisateur"));
        assert_eq!(table.warnings.len(), 1);
    }
}
