//! Binary XML (type 0x0003) decoding into a plain element tree.

use serde::{Deserialize, Serialize};

use super::chunk::*;
use super::string_pool::{string_pool_from_chunk, StringPool};
use super::DecodeError;

pub const TYPE_NULL: u8 = 0x00;
pub const TYPE_REFERENCE: u8 = 0x01;
pub const TYPE_STRING: u8 = 0x03;
pub const TYPE_INT_DEC: u8 = 0x10;
pub const TYPE_INT_HEX: u8 = 0x11;
pub const TYPE_INT_BOOLEAN: u8 = 0x12;

pub const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XmlDocument {
    pub namespaces: Vec<Namespace>,
    pub root: Element,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Namespace {
    pub prefix: String,
    pub uri: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub namespace: Option<String>,
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub children: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub namespace: Option<String>,
    pub name: String,
    pub value: AttrValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttrValue {
    String(String),
    Int(i32),
    Hex(u32),
    Bool(bool),
    Reference(u32),
    Other { data_type: u8, data: u32 },
}

impl AttrValue {
    /// Canonical text rendering of the typed value.
    pub fn text(&self) -> String {
        match self {
            AttrValue::String(s) => s.clone(),
            AttrValue::Int(v) => v.to_string(),
            AttrValue::Hex(v) => format!("0x{v:x}"),
            AttrValue::Bool(b) => b.to_string(),
            AttrValue::Reference(id) => format!("@0x{id:08X}"),
            AttrValue::Other { data_type, data } => format!("(type 0x{data_type:02x})0x{data:x}"),
        }
    }
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Element {
            namespace: None,
            name: name.into(),
            attributes: Vec::new(),
            children: Vec::new(),
        }
    }

    /// First attribute with the given local name, in any namespace.
    pub fn attr(&self, name: &str) -> Option<&AttrValue> {
        self.attributes
            .iter()
            .find(|a| a.name == name)
            .map(|a| &a.value)
    }

    pub fn child_elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    /// Depth-first walk yielding each element with its slash-separated path.
    pub fn walk(&self) -> Vec<(String, &Element)> {
        fn go<'a>(e: &'a Element, prefix: &str, out: &mut Vec<(String, &'a Element)>) {
            let path = if prefix.is_empty() {
                e.name.clone()
            } else {
                format!("{prefix}/{}", e.name)
            };
            out.push((path.clone(), e));
            for child in e.child_elements() {
                go(child, &path, out);
            }
        }
        let mut out = Vec::new();
        go(self, "", &mut out);
        out
    }
}

/// Attribute names for framework resource ids, used when a compiled
/// document leaves the attribute name string empty.
fn framework_attr_name(id: u32) -> Option<&'static str> {
    Some(match id {
        0x0101_0003 => "name",
        0x0101_020c => "minSdkVersion",
        0x0101_0270 => "targetSdkVersion",
        0x0101_021b => "versionCode",
        0x0101_021c => "versionName",
        0x0101_0001 => "label",
        0x0101_0002 => "icon",
        _ => return None,
    })
}

pub fn decode_axml(bytes: &[u8]) -> Result<XmlDocument, DecodeError> {
    let mut warnings = Vec::new();
    decode_axml_with(bytes, &mut warnings)
}

pub fn decode_axml_with(bytes: &[u8], warnings: &mut Vec<String>) -> Result<XmlDocument, DecodeError> {
    let top = Chunk::parse(bytes, 0)?;
    if top.header.chunk_type != RES_XML_TYPE {
        return Err(DecodeError::UnexpectedChunk {
            offset: 0,
            expected: RES_XML_TYPE,
            found: top.header.chunk_type,
        });
    }

    let mut pool: Option<StringPool> = None;
    let mut resource_map: Vec<u32> = Vec::new();
    let mut namespaces = Vec::new();
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;

    let header_size = top.header.header_size as usize;
    for chunk in ChunkIter::new(top.body(), header_size) {
        let chunk = chunk?;
        match chunk.header.chunk_type {
            RES_STRING_POOL_TYPE => {
                if pool.is_none() {
                    pool = Some(string_pool_from_chunk(&chunk, warnings)?);
                } else {
                    warnings.push(format!("extra string pool at offset {} ignored", chunk.offset));
                }
            }
            RES_XML_RESOURCE_MAP_TYPE => {
                let mut r = Reader::new(chunk.body());
                while r.remaining() >= 4 {
                    resource_map.push(r.u32("resource map entry")?);
                }
            }
            RES_XML_START_NAMESPACE_TYPE => {
                let pool = pool.as_ref().ok_or(DecodeError::MissingStringPool)?;
                let mut r = node_ext(&chunk)?;
                let prefix = pool.get_opt(r.u32("namespace prefix")?)?.unwrap_or_default();
                let uri = pool.get(r.u32("namespace uri")?)?;
                namespaces.push(Namespace {
                    prefix: prefix.to_string(),
                    uri: uri.to_string(),
                });
            }
            RES_XML_END_NAMESPACE_TYPE => {}
            RES_XML_START_ELEMENT_TYPE => {
                let pool = pool.as_ref().ok_or(DecodeError::MissingStringPool)?;
                let element = read_start_element(&chunk, pool, &resource_map)?;
                if root.is_some() && stack.is_empty() {
                    return Err(DecodeError::Unbalanced {
                        offset: chunk.offset,
                        detail: format!("second root element <{}>", element.name),
                    });
                }
                stack.push(element);
            }
            RES_XML_END_ELEMENT_TYPE => {
                let pool = pool.as_ref().ok_or(DecodeError::MissingStringPool)?;
                let mut r = node_ext(&chunk)?;
                let _ns = r.u32("end element namespace")?;
                let name = pool.get(r.u32("end element name")?)?;
                let element = stack.pop().ok_or_else(|| DecodeError::Unbalanced {
                    offset: chunk.offset,
                    detail: format!("</{name}> without an open element"),
                })?;
                if element.name != name {
                    return Err(DecodeError::Unbalanced {
                        offset: chunk.offset,
                        detail: format!("</{name}> closes <{}>", element.name),
                    });
                }
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Element(element)),
                    None => root = Some(element),
                }
            }
            RES_XML_CDATA_TYPE => {
                let pool = pool.as_ref().ok_or(DecodeError::MissingStringPool)?;
                let mut r = node_ext(&chunk)?;
                let text = pool.get(r.u32("cdata string")?)?.to_string();
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Text(text)),
                    None => warnings.push(format!("text outside the root element at offset {}", chunk.offset)),
                }
            }
            other => {
                let message = format!(
                    "skipping unknown chunk type 0x{other:04x} at offset {}",
                    chunk.offset
                );
                log::warn!("{message}");
                warnings.push(message);
            }
        }
    }

    if let Some(open) = stack.last() {
        return Err(DecodeError::Unbalanced {
            offset: bytes.len(),
            detail: format!("<{}> is never closed", open.name),
        });
    }
    let root = root.ok_or(DecodeError::EmptyDocument)?;
    Ok(XmlDocument { namespaces, root })
}

/// Reader positioned at the node extension, past the line/comment header.
fn node_ext<'a>(chunk: &Chunk<'a>) -> Result<Reader<'a>, DecodeError> {
    Ok(Reader::at(chunk.data, chunk.header.header_size as usize))
}

fn read_start_element(
    chunk: &Chunk<'_>,
    pool: &StringPool,
    resource_map: &[u32],
) -> Result<Element, DecodeError> {
    let mut r = node_ext(chunk)?;
    let ext_start = r.pos();
    let ns = r.u32("element namespace")?;
    let name = pool.get(r.u32("element name")?)?;
    let attr_start = r.u16("attribute start")? as usize;
    let attr_size = r.u16("attribute size")? as usize;
    let attr_count = r.u16("attribute count")? as usize;
    if attr_count > 0 && attr_size < 20 {
        return Err(DecodeError::OffsetOutOfRange {
            what: "attribute size",
            offset: chunk.offset + ext_start,
        });
    }

    let mut element = Element {
        namespace: pool.get_opt(ns)?.map(str::to_string),
        name: name.to_string(),
        attributes: Vec::with_capacity(attr_count.min(chunk.data.len() / 20)),
        children: Vec::new(),
    };
    for i in 0..attr_count {
        let mut a = Reader::at(chunk.data, ext_start + attr_start + i * attr_size);
        let attr_ns = a.u32("attribute namespace")?;
        let name_index = a.u32("attribute name")?;
        let raw_value = a.u32("attribute raw value")?;
        let _size = a.u16("attribute value size")?;
        let _res0 = a.u8("attribute value reserved")?;
        let data_type = a.u8("attribute value type")?;
        let data = a.u32("attribute value data")?;

        let mut attr_name = pool.get(name_index)?.to_string();
        if attr_name.is_empty() {
            if let Some(known) = resource_map
                .get(name_index as usize)
                .and_then(|id| framework_attr_name(*id))
            {
                attr_name = known.to_string();
            }
        }
        let value = match data_type {
            TYPE_STRING => AttrValue::String(pool.get(data)?.to_string()),
            TYPE_INT_DEC => AttrValue::Int(data as i32),
            TYPE_INT_HEX => AttrValue::Hex(data),
            TYPE_INT_BOOLEAN => AttrValue::Bool(data != 0),
            TYPE_REFERENCE => AttrValue::Reference(data),
            TYPE_NULL if raw_value != u32::MAX => AttrValue::String(pool.get(raw_value)?.to_string()),
            _ => AttrValue::Other { data_type, data },
        };
        element.attributes.push(Attribute {
            namespace: pool.get_opt(attr_ns)?.map(str::to_string),
            name: attr_name,
            value,
        });
    }
    Ok(element)
}
