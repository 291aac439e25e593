//! String pool chunks (type 0x0001).

use serde::{Deserialize, Serialize};

use super::chunk::{Chunk, Reader, RES_STRING_POOL_TYPE};
use super::DecodeError;

pub const SORTED_FLAG: u32 = 1 << 0;
pub const UTF8_FLAG: u32 = 1 << 8;

const STYLE_SPAN_END: u32 = 0xFFFF_FFFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StringEncoding {
    Utf8,
    Utf16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringPool {
    pub strings: Vec<String>,
    pub encoding: StringEncoding,
    pub sorted: bool,
}

impl StringPool {
    pub fn get(&self, index: u32) -> Result<&str, DecodeError> {
        self.strings
            .get(index as usize)
            .map(String::as_str)
            .ok_or(DecodeError::StringIndexOutOfBounds {
                index,
                len: self.strings.len(),
            })
    }

    /// Resolves an optional reference; `0xFFFFFFFF` means "no string".
    pub fn get_opt(&self, index: u32) -> Result<Option<&str>, DecodeError> {
        if index == u32::MAX {
            Ok(None)
        } else {
            self.get(index).map(Some)
        }
    }
}

pub fn parse_string_pool(bytes: &[u8]) -> Result<StringPool, DecodeError> {
    let mut warnings = Vec::new();
    parse_string_pool_with(bytes, 0, &mut warnings)
}

pub(crate) fn parse_string_pool_with(
    bytes: &[u8],
    base: usize,
    warnings: &mut Vec<String>,
) -> Result<StringPool, DecodeError> {
    let chunk = Chunk::parse(bytes, base)?;
    if chunk.header.chunk_type != RES_STRING_POOL_TYPE {
        return Err(DecodeError::UnexpectedChunk {
            offset: base,
            expected: RES_STRING_POOL_TYPE,
            found: chunk.header.chunk_type,
        });
    }
    string_pool_from_chunk(&chunk, warnings)
}

pub(crate) fn string_pool_from_chunk(
    chunk: &Chunk<'_>,
    warnings: &mut Vec<String>,
) -> Result<StringPool, DecodeError> {
    let data = chunk.data;
    let mut header = Reader::at(chunk.header_bytes(), 8);
    let string_count = header.u32("string pool string count")? as usize;
    let style_count = header.u32("string pool style count")? as usize;
    let flags = header.u32("string pool flags")?;
    let strings_start = header.u32("string pool strings start")? as usize;
    let styles_start = header.u32("string pool styles start")? as usize;

    let encoding = if flags & UTF8_FLAG != 0 {
        StringEncoding::Utf8
    } else {
        StringEncoding::Utf16
    };

    // Offset tables sit right after the header; bounding them by the chunk
    // length also bounds every allocation below by the input size.
    let table_len = string_count
        .checked_add(style_count)
        .and_then(|n| n.checked_mul(4))
        .ok_or(DecodeError::OffsetOutOfRange {
            what: "string offset table",
            offset: chunk.offset,
        })?;
    let mut offsets = Reader::at(data, chunk.header.header_size as usize);
    if table_len > offsets.remaining() {
        return Err(DecodeError::Truncated {
            what: "string offset table",
            offset: chunk.offset + offsets.pos(),
            needed: table_len,
            available: offsets.remaining(),
        });
    }

    if string_count > 0 && strings_start >= data.len() {
        return Err(DecodeError::OffsetOutOfRange {
            what: "string data start",
            offset: chunk.offset + strings_start,
        });
    }
    let string_data = if string_count > 0 {
        let end = if style_count > 0 && styles_start > strings_start && styles_start <= data.len() {
            styles_start
        } else {
            data.len()
        };
        &data[strings_start..end]
    } else {
        &[][..]
    };

    let mut strings = Vec::with_capacity(string_count);
    for i in 0..string_count {
        let offset = offsets.u32("string offset")? as usize;
        if offset >= string_data.len() {
            return Err(DecodeError::OffsetOutOfRange {
                what: "string offset",
                offset: chunk.offset + strings_start + offset,
            });
        }
        let mut r = Reader::at(string_data, offset);
        let (text, lossy) = match encoding {
            StringEncoding::Utf8 => read_utf8(&mut r)?,
            StringEncoding::Utf16 => read_utf16(&mut r)?,
        };
        if lossy {
            let message = format!("string pool entry {i} is not valid text; decoded lossily");
            log::warn!("{message}");
            warnings.push(message);
        }
        strings.push(text);
    }

    // Style spans carry formatting only; walk them for bounds and drop them.
    for _ in 0..style_count {
        let offset = offsets.u32("style offset")? as usize;
        let start = styles_start
            .checked_add(offset)
            .filter(|s| *s < data.len())
            .ok_or(DecodeError::OffsetOutOfRange {
                what: "style offset",
                offset: chunk.offset + styles_start,
            })?;
        let mut r = Reader::at(data, start);
        loop {
            let name = r.u32("style span")?;
            if name == STYLE_SPAN_END {
                break;
            }
            r.skip(8, "style span range")?;
        }
    }

    Ok(StringPool {
        strings,
        encoding,
        sorted: flags & SORTED_FLAG != 0,
    })
}

fn read_utf8_len(r: &mut Reader<'_>) -> Result<usize, DecodeError> {
    let first = r.u8("utf-8 length")? as usize;
    if first & 0x80 != 0 {
        let second = r.u8("utf-8 length")? as usize;
        Ok(((first & 0x7f) << 8) | second)
    } else {
        Ok(first)
    }
}

fn read_utf8(r: &mut Reader<'_>) -> Result<(String, bool), DecodeError> {
    let _char_len = read_utf8_len(r)?;
    let byte_len = read_utf8_len(r)?;
    let bytes = r.bytes(byte_len, "utf-8 string data")?;
    match std::str::from_utf8(bytes) {
        Ok(s) => Ok((s.to_string(), false)),
        Err(_) => Ok((String::from_utf8_lossy(bytes).into_owned(), true)),
    }
}

fn read_utf16(r: &mut Reader<'_>) -> Result<(String, bool), DecodeError> {
    let first = r.u16("utf-16 length")? as usize;
    let len = if first & 0x8000 != 0 {
        let second = r.u16("utf-16 length")? as usize;
        ((first & 0x7fff) << 16) | second
    } else {
        first
    };
    let bytes = r.bytes(
        len.checked_mul(2).ok_or(DecodeError::OffsetOutOfRange {
            what: "utf-16 length",
            offset: r.pos(),
        })?,
        "utf-16 string data",
    )?;
    let units: Vec<u16> = bytes
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    match String::from_utf16(&units) {
        Ok(s) => Ok((s, false)),
        Err(_) => Ok((String::from_utf16_lossy(&units), true)),
    }
}
