//! Little-endian primitives shared by the label formats.
//!
//! Distances are 8 bytes with all-ones for "unreachable". Counts are a
//! varint byte length followed by that many little-endian magnitude bytes.

use num_bigint::BigUint;
use thiserror::Error;

use crate::count::{CountMode, CountValue};
use crate::graph::Distance;

pub const LABEL_VERSION: u32 = 1;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("unexpected end of data")]
    Truncated,
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("bad magic bytes")]
    Magic,
    #[error("invalid data: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CodecError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            CodecError::Truncated
        } else {
            CodecError::Io(e.to_string())
        }
    }
}

#[derive(Default)]
pub struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn u8(&mut self, x: u8) {
        self.buf.push(x);
    }

    pub fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn id(&mut self, x: usize) {
        self.u32(u32::try_from(x).expect("vertex and piece ids fit in 32 bits"));
    }

    pub fn varint(&mut self, mut x: u64) {
        loop {
            let byte = (x & 0x7f) as u8;
            x >>= 7;
            if x == 0 {
                self.buf.push(byte);
                return;
            }
            self.buf.push(byte | 0x80);
        }
    }

    pub fn dist(&mut self, d: Distance) {
        self.u64(if d.is_finite() { d.get() } else { u64::MAX });
    }

    pub fn count(&mut self, c: &CountValue) {
        let bytes = c.to_le_bytes();
        self.varint(bytes.len() as u64);
        self.buf.extend_from_slice(&bytes);
    }

    /// Version, mode tag and prime (0 for exact).
    pub fn mode_header(&mut self, mode: CountMode) {
        self.u32(LABEL_VERSION);
        match mode {
            CountMode::Exact => {
                self.u8(0);
                self.u64(0);
            }
            CountMode::Mod(p) => {
                self.u8(1);
                self.u64(p);
            }
        }
    }
}

pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Reader<'a> {
        Reader { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(CodecError::Truncated)?;
        let s = self.data.get(self.pos..end).ok_or(CodecError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    pub fn finished(&self) -> bool {
        self.pos == self.data.len()
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn id(&mut self) -> Result<usize, CodecError> {
        Ok(self.u32()? as usize)
    }

    /// A length prefix, sanity-checked against the bytes left so corrupt
    /// input cannot trigger huge allocations.
    pub fn len(&mut self, min_item_bytes: usize) -> Result<usize, CodecError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_item_bytes.max(1)) > self.data.len() - self.pos {
            return Err(CodecError::Truncated);
        }
        Ok(n)
    }

    pub fn varint(&mut self) -> Result<u64, CodecError> {
        let mut x = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.u8()?;
            x |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
        }
        Err(CodecError::Invalid("varint too long".into()))
    }

    pub fn dist(&mut self) -> Result<Distance, CodecError> {
        let raw = self.u64()?;
        if raw == u64::MAX {
            Ok(Distance::INFINITY)
        } else if raw >= Distance::INFINITY.get() {
            Err(CodecError::Invalid(format!("distance {raw} out of range")))
        } else {
            Ok(Distance::new(raw))
        }
    }

    pub fn count(&mut self, mode: CountMode) -> Result<CountValue, CodecError> {
        let len = self.varint()? as usize;
        let bytes = self.take(len)?;
        if let CountMode::Mod(p) = mode {
            if len > 8 || BigUint::from_bytes_le(bytes) >= BigUint::from(p) {
                return Err(CodecError::Invalid("residue not below modulus".into()));
            }
        }
        Ok(mode.from_le_bytes(bytes))
    }

    pub fn mode_header(&mut self) -> Result<CountMode, CodecError> {
        let version = self.u32()?;
        if version != LABEL_VERSION {
            return Err(CodecError::Version(version));
        }
        let tag = self.u8()?;
        let prime = self.u64()?;
        match tag {
            0 => Ok(CountMode::Exact),
            1 if prime >= 2 => Ok(CountMode::Mod(prime)),
            _ => Err(CodecError::Invalid(format!("mode tag {tag} prime {prime}"))),
        }
    }
}
