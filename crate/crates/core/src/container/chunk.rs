//! Chunk framing shared by the binary XML and resource table formats.

use super::DecodeError;

pub const RES_STRING_POOL_TYPE: u16 = 0x0001;
pub const RES_TABLE_TYPE: u16 = 0x0002;
pub const RES_XML_TYPE: u16 = 0x0003;

pub const RES_XML_START_NAMESPACE_TYPE: u16 = 0x0100;
pub const RES_XML_END_NAMESPACE_TYPE: u16 = 0x0101;
pub const RES_XML_START_ELEMENT_TYPE: u16 = 0x0102;
pub const RES_XML_END_ELEMENT_TYPE: u16 = 0x0103;
pub const RES_XML_CDATA_TYPE: u16 = 0x0104;
pub const RES_XML_LAST_CHUNK_TYPE: u16 = 0x017f;
pub const RES_XML_RESOURCE_MAP_TYPE: u16 = 0x0180;

pub const RES_TABLE_PACKAGE_TYPE: u16 = 0x0200;
pub const RES_TABLE_TYPE_TYPE: u16 = 0x0201;
pub const RES_TABLE_TYPE_SPEC_TYPE: u16 = 0x0202;
pub const RES_TABLE_LIBRARY_TYPE: u16 = 0x0203;

pub const CHUNK_HEADER_LEN: usize = 8;

/// Little-endian cursor that never reads past its slice.
#[derive(Debug, Clone)]
pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    pub fn at(data: &'a [u8], pos: usize) -> Self {
        Reader { data, pos }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.data.len().saturating_sub(self.pos)
    }

    pub fn bytes(&mut self, len: usize, what: &'static str) -> Result<&'a [u8], DecodeError> {
        if len > self.remaining() {
            return Err(DecodeError::Truncated {
                what,
                offset: self.pos,
                needed: len,
                available: self.remaining(),
            });
        }
        let out = &self.data[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    pub fn skip(&mut self, len: usize, what: &'static str) -> Result<(), DecodeError> {
        self.bytes(len, what).map(|_| ())
    }

    pub fn u8(&mut self, what: &'static str) -> Result<u8, DecodeError> {
        Ok(self.bytes(1, what)?[0])
    }

    pub fn u16(&mut self, what: &'static str) -> Result<u16, DecodeError> {
        let b = self.bytes(2, what)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    pub fn u32(&mut self, what: &'static str) -> Result<u32, DecodeError> {
        let b = self.bytes(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkHeader {
    pub chunk_type: u16,
    pub header_size: u16,
    pub chunk_size: u32,
}

impl ChunkHeader {
    /// Reads a header at the start of `data` and checks it against the bytes available.
    pub fn parse(data: &[u8], offset: usize) -> Result<ChunkHeader, DecodeError> {
        let mut r = Reader::new(data);
        let header = ChunkHeader {
            chunk_type: r.u16("chunk type")?,
            header_size: r.u16("chunk header size")?,
            chunk_size: r.u32("chunk size")?,
        };
        let header_size = header.header_size as usize;
        let chunk_size = header.chunk_size as usize;
        if header_size < CHUNK_HEADER_LEN || header_size > chunk_size {
            return Err(DecodeError::BadChunkHeader {
                offset,
                chunk_type: header.chunk_type,
                header_size: header.header_size,
                chunk_size: header.chunk_size,
            });
        }
        if chunk_size > data.len() {
            return Err(DecodeError::Truncated {
                what: "chunk body",
                offset,
                needed: chunk_size,
                available: data.len(),
            });
        }
        Ok(header)
    }
}

/// A chunk borrowed from its enclosing buffer.
#[derive(Debug, Clone, Copy)]
pub struct Chunk<'a> {
    pub header: ChunkHeader,
    /// Absolute offset of the chunk within the top-level input, for diagnostics.
    pub offset: usize,
    /// The whole chunk, header included.
    pub data: &'a [u8],
}

impl<'a> Chunk<'a> {
    pub fn parse(data: &'a [u8], offset: usize) -> Result<Chunk<'a>, DecodeError> {
        let header = ChunkHeader::parse(data, offset)?;
        Ok(Chunk {
            header,
            offset,
            data: &data[..header.chunk_size as usize],
        })
    }

    pub fn header_bytes(&self) -> &'a [u8] {
        &self.data[..self.header.header_size as usize]
    }

    pub fn body(&self) -> &'a [u8] {
        &self.data[self.header.header_size as usize..]
    }
}

/// Iterates sibling chunks laid out back to back in `data`.
pub struct ChunkIter<'a> {
    data: &'a [u8],
    pos: usize,
    base: usize,
    failed: bool,
}

impl<'a> ChunkIter<'a> {
    pub fn new(data: &'a [u8], base: usize) -> Self {
        ChunkIter {
            data,
            pos: 0,
            base,
            failed: false,
        }
    }
}

impl<'a> Iterator for ChunkIter<'a> {
    type Item = Result<Chunk<'a>, DecodeError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.pos >= self.data.len() {
            return None;
        }
        let result = Chunk::parse(&self.data[self.pos..], self.base + self.pos);
        match &result {
            Ok(chunk) => self.pos += chunk.header.chunk_size as usize,
            Err(_) => self.failed = true,
        }
        Some(result)
    }
}
