//! Binary embedding records, one file per `(model, image key)`.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "EMB1" | u32 len | model id (UTF-8) | u32 dim | u32 len | image key (UTF-8)
//!        | dim × f32 payload | u32 CRC-32 of the payload bytes
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Embedding, ExtractionError};
use crate::model::ModelId;

pub const RECORD_MAGIC: &[u8; 4] = b"EMB1";

pub fn encode_record(e: &Embedding) -> Vec<u8> {
    let model = e.model_id.as_str().as_bytes();
    let key = e.image_key.as_bytes();
    let mut buf = Vec::with_capacity(20 + model.len() + key.len() + 4 * e.vector.len());
    buf.extend_from_slice(RECORD_MAGIC);
    buf.extend_from_slice(&(model.len() as u32).to_le_bytes());
    buf.extend_from_slice(model);
    buf.extend_from_slice(&(e.vector.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(key.len() as u32).to_le_bytes());
    buf.extend_from_slice(key);
    let payload_start = buf.len();
    for v in &e.vector {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf[payload_start..]);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or("truncated record")?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<&'a str, String> {
        let n = self.u32()? as usize;
        std::str::from_utf8(self.take(n)?).map_err(|_| "header string is not UTF-8".to_string())
    }
}

/// Decodes a record, verifying magic, header consistency and payload checksum.
/// The error string describes the first inconsistency found.
pub fn decode_record(bytes: &[u8]) -> Result<Embedding, String> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4)? != RECORD_MAGIC {
        return Err("bad magic".into());
    }
    let model: ModelId = cur.string()?.parse().map_err(|e: crate::model::UnknownModel| e.to_string())?;
    let dim = cur.u32()? as usize;
    if dim != model.expected_dim() {
        return Err(format!("dimension {dim} does not match {model}"));
    }
    let key = cur.string()?.to_string();
    let payload = cur.take(dim.checked_mul(4).ok_or("dimension overflow")?)?;
    let crc = cur.u32()?;
    if cur.pos != bytes.len() {
        return Err("trailing bytes after checksum".into());
    }
    if crc32fast::hash(payload) != crc {
        return Err("payload checksum mismatch".into());
    }
    let vector = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    Embedding::new(model, key, vector).map_err(|e| e.to_string())
}

/// Directory-backed embedding cache. Writes go to a temporary file that is
/// renamed into place, so readers never observe a partial record.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    root: PathBuf,
}

impl EmbeddingStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ExtractionError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|source| ExtractionError::StoreIo { path: root.clone(), source })?;
        Ok(EmbeddingStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn record_path(&self, model: ModelId, image_key: &str) -> Result<PathBuf, ExtractionError> {
        let valid = !image_key.is_empty()
            && image_key.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
        if !valid {
            return Err(ExtractionError::InvalidKey(image_key.to_string()));
        }
        Ok(self.root.join(model.as_str()).join(format!("{image_key}.emb")))
    }

    pub fn put(&self, embedding: &Embedding) -> Result<(), ExtractionError> {
        let path = self.record_path(embedding.model_id, &embedding.image_key)?;
        let dir = path.parent().expect("record path has a parent");
        let io = |source| ExtractionError::StoreIo { path: path.clone(), source };
        fs::create_dir_all(dir).map_err(io)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(&encode_record(embedding)).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&path).map_err(|e| io(e.error))?;
        Ok(())
    }

    /// `Ok(None)` when no record exists for the key.
    pub fn get(&self, model: ModelId, image_key: &str) -> Result<Option<Embedding>, ExtractionError> {
        let path = self.record_path(model, image_key)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(source) => return Err(ExtractionError::StoreIo { path, source }),
        };
        let corrupt = |reason: String| ExtractionError::CorruptRecord { path: path.clone(), reason };
        let e = decode_record(&bytes).map_err(corrupt)?;
        if e.model_id != model || e.image_key != image_key {
            return Err(corrupt(format!("header names {}/{}", e.model_id, e.image_key)));
        }
        Ok(Some(e))
    }

    pub fn contains(&self, model: ModelId, image_key: &str) -> Result<bool, ExtractionError> {
        Ok(self.record_path(model, image_key)?.is_file())
    }
}
