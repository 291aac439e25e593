//! Resource table (type 0x0002) decoding, limited to string-typed values.

use super::axml::TYPE_STRING;
use super::chunk::*;
use super::string_pool::{string_pool_from_chunk, StringPool};
use super::DecodeError;

const NO_ENTRY: u32 = 0xFFFF_FFFF;
const NO_ENTRY16: u16 = 0xFFFF;

const FLAG_COMPLEX: u16 = 0x0001;
const FLAG_COMPACT: u16 = 0x0008;

const TYPE_FLAG_SPARSE: u8 = 0x01;
const TYPE_FLAG_OFFSET16: u8 = 0x02;

/// A string value recovered from the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableString {
    pub package: String,
    pub locale: String,
    pub name: String,
    pub value: String,
}

pub fn decode_resource_strings(bytes: &[u8], warnings: &mut Vec<String>) -> Result<Vec<TableString>, DecodeError> {
    let top = Chunk::parse(bytes, 0)?;
    if top.header.chunk_type != RES_TABLE_TYPE {
        return Err(DecodeError::UnexpectedChunk {
            offset: 0,
            expected: RES_TABLE_TYPE,
            found: top.header.chunk_type,
        });
    }

    let mut values: Option<StringPool> = None;
    let mut out = Vec::new();
    let header_size = top.header.header_size as usize;
    for chunk in ChunkIter::new(top.body(), header_size) {
        let chunk = chunk?;
        match chunk.header.chunk_type {
            RES_STRING_POOL_TYPE if values.is_none() => {
                values = Some(string_pool_from_chunk(&chunk, warnings)?);
            }
            RES_TABLE_PACKAGE_TYPE => {
                let values = values.as_ref().ok_or(DecodeError::MissingStringPool)?;
                read_package(&chunk, values, warnings, &mut out)?;
            }
            other => {
                let message = format!(
                    "skipping resource table chunk 0x{other:04x} at offset {}",
                    chunk.offset
                );
                log::warn!("{message}");
                warnings.push(message);
            }
        }
    }
    Ok(out)
}

fn read_package(
    chunk: &Chunk<'_>,
    values: &StringPool,
    warnings: &mut Vec<String>,
    out: &mut Vec<TableString>,
) -> Result<(), DecodeError> {
    let mut r = Reader::at(chunk.header_bytes(), 8);
    let _id = r.u32("package id")?;
    let name_units: Vec<u16> = r
        .bytes(256, "package name")?
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .take_while(|u| *u != 0)
        .collect();
    let package = String::from_utf16_lossy(&name_units);
    let type_strings_offset = r.u32("type strings offset")? as usize;
    let _last_public_type = r.u32("last public type")?;
    let key_strings_offset = r.u32("key strings offset")? as usize;

    let pool_at = |offset: usize, what: &'static str, warnings: &mut Vec<String>| {
        if offset >= chunk.data.len() {
            return Err(DecodeError::OffsetOutOfRange {
                what,
                offset: chunk.offset + offset,
            });
        }
        let sub = Chunk::parse(&chunk.data[offset..], chunk.offset + offset)?;
        if sub.header.chunk_type != RES_STRING_POOL_TYPE {
            return Err(DecodeError::UnexpectedChunk {
                offset: sub.offset,
                expected: RES_STRING_POOL_TYPE,
                found: sub.header.chunk_type,
            });
        }
        string_pool_from_chunk(&sub, warnings)
    };
    let type_names = pool_at(type_strings_offset, "type strings", warnings)?;
    let keys = pool_at(key_strings_offset, "key strings", warnings)?;

    let header_size = chunk.header.header_size as usize;
    for sub in ChunkIter::new(chunk.body(), chunk.offset + header_size) {
        let sub = sub?;
        match sub.header.chunk_type {
            RES_TABLE_TYPE_TYPE => {
                read_type(&sub, &package, values, &type_names, &keys, warnings, out)?;
            }
            RES_STRING_POOL_TYPE | RES_TABLE_TYPE_SPEC_TYPE | RES_TABLE_LIBRARY_TYPE => {}
            other => {
                let message = format!(
                    "skipping package chunk 0x{other:04x} at offset {}",
                    sub.offset
                );
                log::warn!("{message}");
                warnings.push(message);
            }
        }
    }
    Ok(())
}

fn read_type(
    chunk: &Chunk<'_>,
    package: &str,
    values: &StringPool,
    type_names: &StringPool,
    keys: &StringPool,
    warnings: &mut Vec<String>,
    out: &mut Vec<TableString>,
) -> Result<(), DecodeError> {
    let mut r = Reader::at(chunk.header_bytes(), 8);
    let type_id = r.u8("type id")?;
    let flags = r.u8("type flags")?;
    let _reserved = r.u16("type reserved")?;
    let entry_count = r.u32("type entry count")? as usize;
    let entries_start = r.u32("type entries start")? as usize;
    let config_start = r.pos();
    let config_size = r.u32("config size")? as usize;
    let config = Reader::at(chunk.header_bytes(), config_start)
        .bytes(config_size.max(4), "config")?;

    if type_id == 0 || type_names.get(u32::from(type_id) - 1)? != "string" {
        return Ok(());
    }
    let Some(locale) = locale_of(config) else {
        return Ok(());
    };

    // (entry index, offset relative to entries_start)
    let mut index = Reader::at(chunk.data, chunk.header.header_size as usize);
    let mut slots: Vec<(usize, usize)> = Vec::new();
    let bounded = entry_count.min(chunk.data.len());
    if flags & TYPE_FLAG_SPARSE != 0 {
        for _ in 0..bounded {
            let idx = index.u16("sparse entry index")? as usize;
            let off = index.u16("sparse entry offset")? as usize * 4;
            slots.push((idx, off));
        }
    } else if flags & TYPE_FLAG_OFFSET16 != 0 {
        for i in 0..bounded {
            let off = index.u16("entry offset")?;
            if off != NO_ENTRY16 {
                slots.push((i, off as usize * 4));
            }
        }
    } else {
        for i in 0..bounded {
            let off = index.u32("entry offset")?;
            if off != NO_ENTRY {
                slots.push((i, off as usize));
            }
        }
    }

    for (_, off) in slots {
        let pos = entries_start
            .checked_add(off)
            .filter(|p| *p < chunk.data.len())
            .ok_or(DecodeError::OffsetOutOfRange {
                what: "resource entry",
                offset: chunk.offset + entries_start,
            })?;
        let mut e = Reader::at(chunk.data, pos);
        let first = e.u16("entry size")?;
        let entry_flags = e.u16("entry flags")?;
        let (key, data_type, data) = if entry_flags & FLAG_COMPACT != 0 {
            let data = e.u32("compact entry data")?;
            (u32::from(first), (entry_flags >> 8) as u8, data)
        } else {
            let key = e.u32("entry key")?;
            if entry_flags & FLAG_COMPLEX != 0 {
                continue;
            }
            let _value_size = e.u16("value size")?;
            let _res0 = e.u8("value reserved")?;
            let data_type = e.u8("value type")?;
            let data = e.u32("value data")?;
            (key, data_type, data)
        };
        if data_type != TYPE_STRING {
            continue;
        }
        let name = keys.get(key)?;
        let value = match values.get(data) {
            Ok(v) => v,
            Err(err) => {
                warnings.push(format!("string resource `{name}`: {err}"));
                continue;
            }
        };
        out.push(TableString {
            package: package.to_string(),
            locale: locale.clone(),
            name: name.to_string(),
            value: value.to_string(),
        });
    }
    Ok(())
}

/// Locale qualifier for a configuration, or `None` when the configuration
/// varies on anything other than locale (density, orientation, ...).
pub(crate) fn locale_of(config: &[u8]) -> Option<String> {
    if config.len() < 12 {
        return Some(String::new());
    }
    let imsi = &config[4..8];
    let rest = &config[12..];
    if imsi.iter().any(|b| *b != 0) || rest.iter().any(|b| *b != 0) {
        return None;
    }
    let language = unpack_code(config[8], config[9], b'a');
    let region = unpack_code(config[10], config[11], b'0');
    Some(match (language.is_empty(), region.is_empty()) {
        (true, _) => String::new(),
        (false, true) => language,
        (false, false) => format!("{language}-r{region}"),
    })
}

fn unpack_code(a: u8, b: u8, base: u8) -> String {
    if a == 0 && b == 0 {
        return String::new();
    }
    if a & 0x80 != 0 {
        let first = b & 0x1f;
        let second = ((b & 0xe0) >> 5) | ((a & 0x03) << 3);
        let third = (a & 0x7c) >> 2;
        return [first, second, third]
            .iter()
            .map(|c| char::from(c + base))
            .collect();
    }
    [a, b].iter().map(|c| char::from(*c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::encode::{encode_arsc, ArscEntry};

    #[test]
    fn default_and_locale_strings() {
        let bytes = encode_arsc(
            "com.x",
            &[
                ArscEntry::new("", "app_name", "Demo"),
                ArscEntry::new("", "btn_report", "Report this user"),
                ArscEntry::new("fr", "app_name", "Démo"),
                ArscEntry::new("pt-rBR", "app_name", "Demonstração"),
            ],
        );
        let mut warnings = Vec::new();
        let strings = decode_resource_strings(&bytes, &mut warnings).unwrap();
        let triples: Vec<_> = strings
            .iter()
            .map(|s| (s.locale.as_str(), s.name.as_str(), s.value.as_str()))
            .collect();
        assert!(triples.contains(&("", "btn_report", "Report this user")));
        assert!(triples.contains(&("fr", "app_name", "Démo")));
        assert!(triples.contains(&("pt-rBR", "app_name", "Demonstração")));
        assert_eq!(strings.len(), 4);
        assert!(strings.iter().all(|s| s.package == "com.x"));
        assert!(warnings.is_empty());
    }

    #[test]
    fn packed_three_letter_language() {
        // "fil" packed as in the platform's config encoding
        let (f, i, l) = (b'f' - b'a', b'i' - b'a', b'l' - b'a');
        let a = 0x80 | (l << 2) | (i >> 3);
        let b = ((i & 0x07) << 5) | f;
        assert_eq!(unpack_code(a, b, b'a'), "fil");
    }

    #[test]
    fn density_configs_are_skipped() {
        let mut config = vec![0u8; 64];
        config[0] = 64;
        assert_eq!(locale_of(&config), Some(String::new()));
        config[14] = 0xa0; // density
        assert_eq!(locale_of(&config), None);
    }

    #[test]
    fn truncated_table() {
        let bytes = encode_arsc("com.x", &[ArscEntry::new("", "a", "b")]);
        let mut warnings = Vec::new();
        for cut in [3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(decode_resource_strings(&bytes[..cut], &mut warnings).is_err());
        }
    }
}
