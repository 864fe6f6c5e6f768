//! Binary index file.
//!
//! Little-endian layout:
//!
//! ```text
//! "BDIX"  u32 version  u64 n  u64 root
//! u64 parent[n]  u64 dfs_start[n]  u64 dfs_size[n]  u64 label_offset[n]  f64 f[n]
//! f64 values[Σ dfs_size]
//! n × (u32 byte length, UTF-8 label)
//! u32 CRC32C of every preceding byte
//! ```

use std::collections::HashSet;
use std::io::{Read, Write};

use thiserror::Error;

use super::BDIndex;
use crate::hierarchy::HierarchyTree;

pub const MAGIC: &[u8; 4] = b"BDIX";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("not an index file: magic bytes are {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported index version {0}")]
    BadVersion(u32),
    #[error("truncated {section}: expected {expected} bytes, found {actual}")]
    Truncated {
        section: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("{0} trailing bytes after the checksum")]
    TrailingBytes(usize),
    #[error("invalid index: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Writes `idx` and returns the number of bytes written.
pub fn serialize<W: Write>(idx: &BDIndex, mut sink: W) -> Result<u64, FormatError> {
    let bytes = to_bytes(idx);
    sink.write_all(&bytes)?;
    sink.flush()?;
    Ok(bytes.len() as u64)
}

pub fn to_bytes(idx: &BDIndex) -> Vec<u8> {
    let n = idx.n();
    let tree = idx.tree();
    let label_bytes: usize = idx.vertex_labels().iter().map(|l| 4 + l.len()).sum();
    let mut out = Vec::with_capacity(24 + 40 * n + 8 * idx.total_entries() + label_bytes + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(idx.root() as u64).to_le_bytes());
    for column in [tree.parents(), tree.dfs_starts(), tree.dfs_sizes(), idx.offsets()] {
        for &x in column {
            out.extend_from_slice(&(x as u64).to_le_bytes());
        }
    }
    for &f in idx.f_values() {
        out.extend_from_slice(&f.to_le_bytes());
    }
    for &x in idx.values() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for label in idx.vertex_labels() {
        out.extend_from_slice(&(label.len() as u32).to_le_bytes());
        out.extend_from_slice(label.as_bytes());
    }
    let crc = crc32c::crc32c(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, section: &'static str) -> Result<&'a [u8], FormatError> {
        let left = self.data.len() - self.pos;
        if left < len {
            return Err(FormatError::Truncated {
                section,
                expected: len,
                actual: left,
            });
        }
        let out = &self.data[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u32(&mut self, section: &'static str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().unwrap()))
    }

    fn u64(&mut self, section: &'static str) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8, section)?.try_into().unwrap()))
    }

    fn words(&mut self, count: usize, section: &'static str) -> Result<Vec<u64>, FormatError> {
        let len = count.checked_mul(8).ok_or_else(|| too_large(section))?;
        Ok(self
            .take(len, section)?
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn indices(&mut self, count: usize, section: &'static str) -> Result<Vec<usize>, FormatError> {
        self.words(count, section)?
            .into_iter()
            .map(|x| usize::try_from(x).map_err(|_| too_large(section)))
            .collect()
    }

    fn floats(&mut self, count: usize, section: &'static str) -> Result<Vec<f64>, FormatError> {
        Ok(self.words(count, section)?.into_iter().map(f64::from_bits).collect())
    }
}

fn too_large(section: &'static str) -> FormatError {
    FormatError::Invalid(format!("{section} length overflows this platform"))
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

pub fn deserialize<R: Read>(mut source: R) -> Result<BDIndex, FormatError> {
    let mut data = Vec::new();
    source.read_to_end(&mut data)?;
    from_bytes(&data)
}

pub fn from_bytes(data: &[u8]) -> Result<BDIndex, FormatError> {
    let mut cur = Cursor { data, pos: 0 };
    let magic: [u8; 4] = cur.take(4, "header")?.try_into().unwrap();
    if &magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = cur.u32("header")?;
    if version != VERSION {
        return Err(FormatError::BadVersion(version));
    }
    let n = usize::try_from(cur.u64("header")?).map_err(|_| too_large("header"))?;
    let root = usize::try_from(cur.u64("header")?).map_err(|_| too_large("header"))?;
    if n == 0 {
        return Err(invalid("index has no vertices"));
    }
    let parent = cur.indices(n, "parent array")?;
    let dfs_start = cur.indices(n, "dfs_start array")?;
    let dfs_size = cur.indices(n, "dfs_size array")?;
    let offsets = cur.indices(n, "label_offset array")?;
    let f = cur.floats(n, "pivot array")?;
    let total = dfs_size
        .iter()
        .try_fold(0usize, |acc, &s| acc.checked_add(s))
        .ok_or_else(|| too_large("label value array"))?;
    let values = cur.floats(total, "label value array")?;
    let mut labels = Vec::with_capacity(n.min(data.len()));
    for _ in 0..n {
        let len = cur.u32("id map")? as usize;
        let raw = cur.take(len, "id map")?;
        let label = std::str::from_utf8(raw).map_err(|_| invalid("id map label is not UTF-8"))?;
        labels.push(label.to_string());
    }
    let body_end = cur.pos;
    let stored = cur.u32("checksum")?;
    if cur.pos != data.len() {
        return Err(FormatError::TrailingBytes(data.len() - cur.pos));
    }
    let computed = crc32c::crc32c(&data[..body_end]);
    if stored != computed {
        return Err(FormatError::Checksum { stored, computed });
    }

    if root >= n || parent[root] != root {
        return Err(invalid(format!("root {root} is not its own parent")));
    }
    let tree = HierarchyTree::from_parents(parent).map_err(|e| invalid(e.to_string()))?;
    if tree.root() != root {
        return Err(invalid("root field disagrees with the parent array"));
    }
    if tree.dfs_starts() != dfs_start.as_slice() || tree.dfs_sizes() != dfs_size.as_slice() {
        return Err(invalid("stored DFS layout disagrees with the parent array"));
    }
    let mut expected = 0usize;
    for &v in tree.order() {
        if offsets[v] != expected {
            return Err(invalid(format!(
                "label offset of vertex {v} is {}, expected {expected}",
                offsets[v]
            )));
        }
        expected += dfs_size[v];
    }
    for v in 0..n {
        if values[offsets[v]] != 1.0 {
            return Err(invalid(format!("label of vertex {v} does not start with 1")));
        }
        if v != root && !(f[v] > 0.0 && f[v].is_finite()) {
            return Err(invalid(format!("vertex {v} has non-positive pivot {}", f[v])));
        }
    }
    if let Some(x) = values.iter().find(|x| !x.is_finite()) {
        return Err(invalid(format!("label value {x} is not finite")));
    }
    let mut seen = HashSet::with_capacity(n);
    if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
        return Err(invalid(format!("vertex label {dup} appears twice")));
    }
    Ok(BDIndex::from_parts(tree, values, offsets, f, labels))
}
