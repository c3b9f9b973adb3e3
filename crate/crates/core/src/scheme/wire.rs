//! Cursor helpers shared by every binary encoding in the crate.
//!
//! All integers are big-endian. Variable-length fields carry an explicit
//! length or count prefix; group elements are fixed-width for a profile.

use thiserror::Error;

use super::RingError;
use crate::pairing::DecodeError;

/// Upper bound on an envelope payload accepted from the wire.
pub const MAX_MESSAGE_LEN: usize = 1 << 20;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("input truncated: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("{0} trailing bytes after a complete value")]
    TrailingBytes(usize),
    #[error("length field {0} exceeds limit")]
    TooLarge(usize),
    #[error("invalid group element: {0}")]
    Element(#[from] DecodeError),
    #[error("invalid ring: {0}")]
    Ring(#[from] RingError),
    #[error("unknown frame type {0:#04x}")]
    UnknownFrameType(u8),
    #[error("profile mismatch: encoded for {0}")]
    ProfileMismatch(String),
    #[error("malformed field: {0}")]
    Malformed(&'static str),
}

pub struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() < n {
            return Err(WireError::Truncated {
                needed: n - self.buf.len(),
            });
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A `u32` length prefix followed by that many bytes.
    pub fn bytes_u32(&mut self, limit: usize) -> Result<&'a [u8], WireError> {
        let len = self.u32()? as usize;
        if len > limit {
            return Err(WireError::TooLarge(len));
        }
        self.take(len)
    }

    pub fn bytes_u16(&mut self) -> Result<&'a [u8], WireError> {
        let len = self.u16()? as usize;
        self.take(len)
    }

    pub fn remaining(&self) -> usize {
        self.buf.len()
    }

    pub fn finish(self) -> Result<(), WireError> {
        match self.buf.len() {
            0 => Ok(()),
            n => Err(WireError::TrailingBytes(n)),
        }
    }
}

pub fn put_bytes_u32(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

pub fn put_bytes_u16(out: &mut Vec<u8>, bytes: &[u8]) {
    debug_assert!(bytes.len() <= u16::MAX as usize);
    out.extend_from_slice(&(bytes.len() as u16).to_be_bytes());
    out.extend_from_slice(bytes);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reader_reports_truncation_and_trailing() {
        let mut r = Reader::new(&[0, 3, 1, 2]);
        assert_eq!(r.bytes_u16(), Err(WireError::Truncated { needed: 1 }));
        let mut r = Reader::new(&[0, 1, 9, 7]);
        assert_eq!(r.bytes_u16().unwrap(), &[9]);
        assert_eq!(r.finish(), Err(WireError::TrailingBytes(1)));
    }

    #[test]
    fn length_limit_enforced() {
        let mut buf = Vec::new();
        put_bytes_u32(&mut buf, &[0u8; 10]);
        assert_eq!(Reader::new(&buf).bytes_u32(9), Err(WireError::TooLarge(10)));
        assert_eq!(Reader::new(&buf).bytes_u32(10).unwrap().len(), 10);
    }
}
