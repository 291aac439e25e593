//! Writers for the binary resource formats and package containers.
//!
//! These emit the same little-endian chunk layout the decoders read and are
//! used to build fixture packages. They share no code with the decoders.

use std::collections::BTreeMap;
use std::io::{Cursor, Write};

use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipWriter};

use super::axml::{AttrValue, Element, Node, XmlDocument};
use super::string_pool::StringEncoding;

fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn pad4(out: &mut Vec<u8>) {
    while !out.len().is_multiple_of(4) {
        out.push(0);
    }
}

fn chunk(chunk_type: u16, header: &[u8], body: &[u8]) -> Vec<u8> {
    let header_size = 8 + header.len();
    let mut out = Vec::with_capacity(header_size + body.len());
    put_u16(&mut out, chunk_type);
    put_u16(&mut out, header_size as u16);
    put_u32(&mut out, (header_size + body.len()) as u32);
    out.extend_from_slice(header);
    out.extend_from_slice(body);
    out
}

fn encode_len8(out: &mut Vec<u8>, len: usize) {
    assert!(len < 0x8000, "string too long for the pool encoder");
    if len > 0x7f {
        out.push(0x80 | (len >> 8) as u8);
    }
    out.push(len as u8);
}

fn encode_len16(out: &mut Vec<u8>, len: usize) {
    assert!(len < 0x8000_0000, "string too long for the pool encoder");
    if len > 0x7fff {
        put_u16(out, 0x8000 | (len >> 16) as u16);
    }
    put_u16(out, len as u16);
}

pub fn encode_string_pool(strings: &[&str], encoding: StringEncoding, sorted: bool) -> Vec<u8> {
    let mut data = Vec::new();
    let mut offsets = Vec::with_capacity(strings.len());
    for s in strings {
        offsets.push(data.len() as u32);
        match encoding {
            StringEncoding::Utf8 => {
                encode_len8(&mut data, s.chars().count());
                encode_len8(&mut data, s.len());
                data.extend_from_slice(s.as_bytes());
                data.push(0);
            }
            StringEncoding::Utf16 => {
                let units: Vec<u16> = s.encode_utf16().collect();
                encode_len16(&mut data, units.len());
                for u in units {
                    put_u16(&mut data, u);
                }
                put_u16(&mut data, 0);
            }
        }
    }
    pad4(&mut data);

    let mut flags = 0u32;
    if sorted {
        flags |= 1;
    }
    if encoding == StringEncoding::Utf8 {
        flags |= 1 << 8;
    }
    let header_size = 28u32;
    let strings_start = if strings.is_empty() {
        0
    } else {
        header_size + 4 * strings.len() as u32
    };
    let mut header = Vec::new();
    put_u32(&mut header, strings.len() as u32);
    put_u32(&mut header, 0);
    put_u32(&mut header, flags);
    put_u32(&mut header, strings_start);
    put_u32(&mut header, 0);

    let mut body = Vec::new();
    for off in offsets {
        put_u32(&mut body, off);
    }
    body.extend_from_slice(&data);
    chunk(0x0001, &header, &body)
}

/// Interning table that keeps first-use order.
#[derive(Default)]
struct Interner {
    index: BTreeMap<String, u32>,
    order: Vec<String>,
}

impl Interner {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(i) = self.index.get(s) {
            return *i;
        }
        let i = self.order.len() as u32;
        self.index.insert(s.to_string(), i);
        self.order.push(s.to_string());
        i
    }

    fn opt(&mut self, s: Option<&str>) -> u32 {
        s.map_or(u32::MAX, |s| self.intern(s))
    }

    fn pool(&self, encoding: StringEncoding) -> Vec<u8> {
        let refs: Vec<&str> = self.order.iter().map(String::as_str).collect();
        encode_string_pool(&refs, encoding, false)
    }
}

fn xml_node(chunk_type: u16, line: u32, ext: &[u8]) -> Vec<u8> {
    let mut header = Vec::new();
    put_u32(&mut header, line);
    put_u32(&mut header, u32::MAX);
    chunk(chunk_type, &header, ext)
}

pub fn encode_axml(doc: &XmlDocument, encoding: StringEncoding) -> Vec<u8> {
    let mut strings = Interner::default();
    let mut nodes = Vec::new();
    let mut line = 1u32;

    let mut ns_refs = Vec::new();
    for ns in &doc.namespaces {
        let mut ext = Vec::new();
        let prefix = strings.intern(&ns.prefix);
        let uri = strings.intern(&ns.uri);
        put_u32(&mut ext, prefix);
        put_u32(&mut ext, uri);
        nodes.push(xml_node(0x0100, line, &ext));
        ns_refs.push(ext);
    }

    fn element(e: &Element, strings: &mut Interner, nodes: &mut Vec<Vec<u8>>, line: &mut u32) {
        *line += 1;
        let ns = strings.opt(e.namespace.as_deref());
        let name = strings.intern(&e.name);
        let mut ext = Vec::new();
        put_u32(&mut ext, ns);
        put_u32(&mut ext, name);
        put_u16(&mut ext, 20);
        put_u16(&mut ext, 20);
        put_u16(&mut ext, e.attributes.len() as u16);
        put_u16(&mut ext, 0);
        put_u16(&mut ext, 0);
        put_u16(&mut ext, 0);
        for a in &e.attributes {
            let attr_ns = strings.opt(a.namespace.as_deref());
            let attr_name = strings.intern(&a.name);
            let (raw, data_type, data) = match &a.value {
                AttrValue::String(s) => {
                    let i = strings.intern(s);
                    (i, 0x03u8, i)
                }
                AttrValue::Int(v) => (u32::MAX, 0x10, *v as u32),
                AttrValue::Hex(v) => (u32::MAX, 0x11, *v),
                AttrValue::Bool(b) => (u32::MAX, 0x12, if *b { u32::MAX } else { 0 }),
                AttrValue::Reference(id) => (u32::MAX, 0x01, *id),
                AttrValue::Other { data_type, data } => (u32::MAX, *data_type, *data),
            };
            put_u32(&mut ext, attr_ns);
            put_u32(&mut ext, attr_name);
            put_u32(&mut ext, raw);
            put_u16(&mut ext, 8);
            ext.push(0);
            ext.push(data_type);
            put_u32(&mut ext, data);
        }
        nodes.push(xml_node(0x0102, *line, &ext));

        for child in &e.children {
            match child {
                Node::Element(c) => element(c, strings, nodes, line),
                Node::Text(t) => {
                    let i = strings.intern(t);
                    let mut ext = Vec::new();
                    put_u32(&mut ext, i);
                    put_u16(&mut ext, 8);
                    ext.push(0);
                    ext.push(0x00);
                    put_u32(&mut ext, 0);
                    nodes.push(xml_node(0x0104, *line, &ext));
                }
            }
        }

        let mut ext = Vec::new();
        put_u32(&mut ext, ns);
        put_u32(&mut ext, name);
        nodes.push(xml_node(0x0103, *line, &ext));
    }
    element(&doc.root, &mut strings, &mut nodes, &mut line);

    for ext in ns_refs.iter().rev() {
        nodes.push(xml_node(0x0101, line, ext));
    }

    let mut body = strings.pool(encoding);
    for n in nodes {
        body.extend_from_slice(&n);
    }
    chunk(0x0003, &[], &body)
}

/// One string resource to place in an encoded table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArscEntry {
    pub locale: String,
    pub name: String,
    pub value: String,
}

impl ArscEntry {
    pub fn new(locale: &str, name: &str, value: &str) -> Self {
        ArscEntry {
            locale: locale.to_string(),
            name: name.to_string(),
            value: value.to_string(),
        }
    }
}

fn config_bytes(locale: &str) -> Vec<u8> {
    let mut config = vec![0u8; 64];
    config[..4].copy_from_slice(&64u32.to_le_bytes());
    if !locale.is_empty() {
        let (language, region) = match locale.split_once("-r") {
            Some((l, r)) => (l, r),
            None => (locale, ""),
        };
        let l = language.as_bytes();
        assert!(l.len() == 2, "encoder supports two-letter languages only");
        config[8] = l[0];
        config[9] = l[1];
        if !region.is_empty() {
            let r = region.as_bytes();
            config[10] = r[0];
            config[11] = r[1];
        }
    }
    config
}

/// Encodes a single-package table with one `string` type per locale.
pub fn encode_arsc(package: &str, entries: &[ArscEntry]) -> Vec<u8> {
    let mut values = Interner::default();
    let mut keys = Interner::default();
    let mut by_locale: BTreeMap<&str, Vec<(u32, u32)>> = BTreeMap::new();
    for e in entries {
        let k = keys.intern(&e.name);
        let v = values.intern(&e.value);
        by_locale.entry(e.locale.as_str()).or_default().push((k, v));
    }
    let entry_count = keys.order.len() as u32;

    let mut type_strings = Interner::default();
    type_strings.intern("string");
    let type_pool = type_strings.pool(StringEncoding::Utf16);
    let key_pool = keys.pool(StringEncoding::Utf8);

    let mut package_body = Vec::new();
    package_body.extend_from_slice(&type_pool);
    package_body.extend_from_slice(&key_pool);

    let mut spec_header = Vec::new();
    spec_header.push(1u8);
    spec_header.push(0);
    put_u16(&mut spec_header, 0);
    put_u32(&mut spec_header, entry_count);
    let mut spec_body = Vec::new();
    for _ in 0..entry_count {
        put_u32(&mut spec_body, 0);
    }
    package_body.extend_from_slice(&chunk(0x0202, &spec_header, &spec_body));

    for (locale, items) in &by_locale {
        let mut slots = vec![u32::MAX; entry_count as usize];
        let mut data = Vec::new();
        for (key, value) in items {
            slots[*key as usize] = data.len() as u32;
            put_u16(&mut data, 8);
            put_u16(&mut data, 0);
            put_u32(&mut data, *key);
            put_u16(&mut data, 8);
            data.push(0);
            data.push(0x03);
            put_u32(&mut data, *value);
        }
        let config = config_bytes(locale);
        let header_size = 8 + 12 + config.len() as u32;
        let entries_start = header_size + 4 * entry_count;
        let mut header = Vec::new();
        header.push(1u8);
        header.push(0);
        put_u16(&mut header, 0);
        put_u32(&mut header, entry_count);
        put_u32(&mut header, entries_start);
        header.extend_from_slice(&config);
        let mut body = Vec::new();
        for s in slots {
            put_u32(&mut body, s);
        }
        body.extend_from_slice(&data);
        package_body.extend_from_slice(&chunk(0x0201, &header, &body));
    }

    let package_header_size = 8 + 4 + 256 + 4 * 5;
    let mut header = Vec::new();
    put_u32(&mut header, 0x7f);
    let mut name = vec![0u8; 256];
    for (i, unit) in package.encode_utf16().take(127).enumerate() {
        name[i * 2..i * 2 + 2].copy_from_slice(&unit.to_le_bytes());
    }
    header.extend_from_slice(&name);
    put_u32(&mut header, package_header_size as u32);
    put_u32(&mut header, 1);
    put_u32(&mut header, (package_header_size + type_pool.len()) as u32);
    put_u32(&mut header, entry_count);
    put_u32(&mut header, 0);
    let package_chunk = chunk(0x0200, &header, &package_body);

    let mut table_header = Vec::new();
    put_u32(&mut table_header, 1);
    let mut body = values.pool(StringEncoding::Utf8);
    body.extend_from_slice(&package_chunk);
    chunk(0x0002, &table_header, &body)
}

fn zip_options() -> SimpleFileOptions {
    SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default())
}

/// Writes a zip archive with the given members in order.
pub fn build_zip(members: &[(&str, &[u8])]) -> Vec<u8> {
    let mut writer = ZipWriter::new(Cursor::new(Vec::new()));
    for (name, bytes) in members {
        writer
            .start_file(*name, zip_options())
            .expect("in-memory zip entry");
        writer.write_all(bytes).expect("in-memory zip write");
    }
    writer.finish().expect("in-memory zip finish").into_inner()
}

/// Builds an APK holding a binary manifest and an optional resource table.
pub fn build_apk(manifest: &[u8], resources: Option<&[u8]>) -> Vec<u8> {
    let mut members: Vec<(&str, &[u8])> = vec![("AndroidManifest.xml", manifest)];
    if let Some(arsc) = resources {
        members.push(("resources.arsc", arsc));
    }
    members.push(("classes.dex", b"dex\n035\0"));
    build_zip(&members)
}

/// Builds an XAPK bundle from named inner APKs and a bundle manifest.
pub fn build_xapk(package: &str, apks: &[(String, Vec<u8>)]) -> Vec<u8> {
    let split_names: Vec<String> = apks.iter().map(|(n, _)| format!("\"{n}\"")).collect();
    let bundle = format!(
        "{{\"xapk_version\":2,\"package_name\":\"{package}\",\"split_apks\":[{}]}}",
        split_names.join(",")
    );
    let mut members: Vec<(&str, &[u8])> = vec![("manifest.json", bundle.as_bytes())];
    for (name, bytes) in apks {
        members.push((name.as_str(), bytes.as_slice()));
    }
    build_zip(&members)
}
