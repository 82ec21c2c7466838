//! Label archives: one file holding every label of a build behind an
//! id → (offset, length) index, so a query can seek straight to the few
//! labels it needs.
//!
//! Layout, little-endian:
//!
//! ```text
//! magic[4] version:u32 mode:u8 prime:u64 fingerprint:u64 graph_hash:u64
//! leaf_threshold:u32 r:u32 n:u32
//! n × (offset:u64 len:u64)
//! label blobs
//! ```

use std::io::{self, Read, Seek, SeekFrom, Write};
use std::ops::Range;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::codec::{CodecError, Reader, Writer};
use crate::count::CountMode;
use crate::countlabel::{self, CountLabel};
use crate::faultlabel::{self, FaultLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Fault,
    Count,
}

impl Scheme {
    pub fn magic(self) -> &'static [u8; 4] {
        match self {
            Scheme::Fault => b"FTL1",
            Scheme::Count => b"CNT1",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Fault => "fault",
            Scheme::Count => "count",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArchiveHeader {
    pub scheme: Scheme,
    pub mode: CountMode,
    /// Fingerprint of the decomposition tree the labels came from.
    pub fingerprint: u64,
    pub graph_hash: u64,
    pub leaf_threshold: usize,
    /// Region size bound; 0 for counting labels.
    pub r: usize,
    pub n: usize,
}

/// Bytes before the index.
pub const HEADER_BYTES: u64 = 4 + 4 + 1 + 8 + 8 + 8 + 4 + 4 + 4;
const INDEX_ENTRY_BYTES: u64 = 16;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ArchiveError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("vertex {id} is not in the archive ({n} labels)")]
    MissingId { id: usize, n: usize },
    #[error("archive holds {found} labels, expected {expected}")]
    SchemeMismatch { expected: &'static str, found: &'static str },
    #[error("label {0} does not match the archive header")]
    Foreign(usize),
}

impl From<io::Error> for ArchiveError {
    fn from(e: io::Error) -> Self {
        ArchiveError::Codec(e.into())
    }
}

fn header_bytes(h: &ArchiveHeader) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend_from_slice(h.scheme.magic());
    w.mode_header(h.mode);
    w.u64(h.fingerprint);
    w.u64(h.graph_hash);
    w.id(h.leaf_threshold);
    w.id(h.r);
    w.id(h.n);
    w.buf
}

/// Writes header, index and blobs. `blobs[i]` is the encoded label of vertex `i`.
pub fn write_archive<W: Write>(mut out: W, header: &ArchiveHeader, blobs: &[Vec<u8>]) -> io::Result<()> {
    assert_eq!(header.n, blobs.len(), "one blob per vertex");
    out.write_all(&header_bytes(header))?;
    let mut offset = HEADER_BYTES + INDEX_ENTRY_BYTES * blobs.len() as u64;
    for b in blobs {
        out.write_all(&offset.to_le_bytes())?;
        out.write_all(&(b.len() as u64).to_le_bytes())?;
        offset += b.len() as u64;
    }
    for b in blobs {
        out.write_all(b)?;
    }
    out.flush()
}

pub fn fault_archive_bytes(header: &ArchiveHeader, labels: &[FaultLabel]) -> Vec<u8> {
    let blobs: Vec<Vec<u8>> = labels.iter().map(faultlabel::encode_label).collect();
    let mut out = Vec::new();
    write_archive(&mut out, header, &blobs).expect("writing to memory");
    out
}

pub fn count_archive_bytes(header: &ArchiveHeader, labels: &[CountLabel]) -> Vec<u8> {
    let blobs: Vec<Vec<u8>> = labels.iter().map(countlabel::encode_label).collect();
    let mut out = Vec::new();
    write_archive(&mut out, header, &blobs).expect("writing to memory");
    out
}

/// Random-access reader. Opening reads the header and the index only.
pub struct ArchiveReader<R> {
    inner: R,
    pub header: ArchiveHeader,
    index: Vec<(u64, u64)>,
    total_len: u64,
}

impl<R: Read + Seek> ArchiveReader<R> {
    pub fn open(mut inner: R) -> Result<ArchiveReader<R>, ArchiveError> {
        let total_len = inner.seek(SeekFrom::End(0))?;
        inner.seek(SeekFrom::Start(0))?;
        let mut head = vec![0u8; HEADER_BYTES as usize];
        inner.read_exact(&mut head)?;
        let scheme = match &head[..4] {
            b"FTL1" => Scheme::Fault,
            b"CNT1" => Scheme::Count,
            _ => return Err(CodecError::Magic.into()),
        };
        let mut r = Reader::new(&head[4..]);
        let mode = r.mode_header()?;
        let fingerprint = r.u64()?;
        let graph_hash = r.u64()?;
        let leaf_threshold = r.id()?;
        let rr = r.id()?;
        let n = r.id()?;
        let index_end = HEADER_BYTES + INDEX_ENTRY_BYTES * n as u64;
        if index_end > total_len {
            return Err(CodecError::Truncated.into());
        }
        let mut raw = vec![0u8; (INDEX_ENTRY_BYTES as usize) * n];
        inner.read_exact(&mut raw)?;
        let mut r = Reader::new(&raw);
        let mut index = Vec::with_capacity(n);
        for _ in 0..n {
            let (off, len) = (r.u64()?, r.u64()?);
            if off < index_end || off.checked_add(len).is_none_or(|end| end > total_len) {
                return Err(CodecError::Invalid(format!("label range {off}+{len} outside the archive")).into());
            }
            index.push((off, len));
        }
        let header = ArchiveHeader { scheme, mode, fingerprint, graph_hash, leaf_threshold, r: rr, n };
        Ok(ArchiveReader { inner, header, index, total_len })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn byte_range(&self, id: usize) -> Option<Range<u64>> {
        self.index.get(id).map(|&(off, len)| off..off + len)
    }

    pub fn file_len(&self) -> u64 {
        self.total_len
    }

    pub fn blob(&mut self, id: usize) -> Result<Vec<u8>, ArchiveError> {
        let &(off, len) = self.index.get(id).ok_or(ArchiveError::MissingId { id, n: self.index.len() })?;
        self.inner.seek(SeekFrom::Start(off))?;
        let mut buf = vec![0u8; len as usize];
        self.inner.read_exact(&mut buf)?;
        Ok(buf)
    }

    fn expect(&self, scheme: Scheme) -> Result<(), ArchiveError> {
        if self.header.scheme != scheme {
            return Err(ArchiveError::SchemeMismatch { expected: scheme.name(), found: self.header.scheme.name() });
        }
        Ok(())
    }

    pub fn fault_label(&mut self, id: usize) -> Result<FaultLabel, ArchiveError> {
        self.expect(Scheme::Fault)?;
        let l = faultlabel::decode_label(&self.blob(id)?)?;
        if l.owner != id || l.mode != self.header.mode {
            return Err(ArchiveError::Foreign(id));
        }
        Ok(l)
    }

    pub fn count_label(&mut self, id: usize) -> Result<CountLabel, ArchiveError> {
        self.expect(Scheme::Count)?;
        let l = countlabel::decode_label(&self.blob(id)?)?;
        if l.owner != id || l.mode != self.header.mode {
            return Err(ArchiveError::Foreign(id));
        }
        Ok(l)
    }
}

/// Pass-through reader that records every byte range read, for checking
/// that a query touches only the labels it names.
pub struct AuditReader<R> {
    inner: R,
    pos: u64,
    log: Arc<Mutex<Vec<Range<u64>>>>,
}

impl<R: Read + Seek> AuditReader<R> {
    pub fn new(inner: R) -> (AuditReader<R>, Arc<Mutex<Vec<Range<u64>>>>) {
        let log = Arc::new(Mutex::new(Vec::new()));
        (AuditReader { inner, pos: 0, log: Arc::clone(&log) }, log)
    }
}

impl<R: Read> Read for AuditReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let k = self.inner.read(buf)?;
        if k > 0 {
            self.log.lock().unwrap().push(self.pos..self.pos + k as u64);
        }
        self.pos += k as u64;
        Ok(k)
    }
}

impl<R: Seek> Seek for AuditReader<R> {
    fn seek(&mut self, to: SeekFrom) -> io::Result<u64> {
        self.pos = self.inner.seek(to)?;
        Ok(self.pos)
    }
}
