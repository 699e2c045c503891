//! `.cemb` binary format.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "CEMB"
//!      4     4  version (u32 LE) = 1
//!      8     1  role (0 context, 1 query, 2 compressed)
//!      9     1  dtype (0 = f32 LE)
//!     10     8  rows (u64 LE)
//!     18     8  cols (u64 LE)
//!     26     -  rows * cols f32 LE, row-major
//! ```
//!
//! Encoding and decoding work on byte buffers; the `comi` crate wraps them
//! around readers and writers.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{EmbeddingMatrix, Role};

pub const MAGIC: [u8; 4] = *b"CEMB";
pub const VERSION: u32 = 1;
pub const DTYPE_F32: u8 = 0;
pub const HEADER_LEN: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbHeader {
    pub role: Role,
    pub rows: u64,
    pub cols: u64,
}

impl EmbHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..8].copy_from_slice(&VERSION.to_le_bytes());
        out[8] = self.role.as_byte();
        out[9] = DTYPE_F32;
        out[10..18].copy_from_slice(&self.rows.to_le_bytes());
        out[18..26].copy_from_slice(&self.cols.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format("file shorter than the 26-byte header"));
        }
        if bytes[0..4] != MAGIC {
            return Err(Error::Format("bad magic, expected \"CEMB\""));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format("unsupported version"));
        }
        let role = Role::from_byte(bytes[8]).ok_or(Error::Format("unknown role byte"))?;
        if bytes[9] != DTYPE_F32 {
            return Err(Error::Format("unsupported dtype, only f32 is accepted"));
        }
        let rows = u64::from_le_bytes(bytes[10..18].try_into().unwrap());
        let cols = u64::from_le_bytes(bytes[18..26].try_into().unwrap());
        if cols == 0 {
            return Err(Error::Format("cols must be at least 1"));
        }
        Ok(EmbHeader { role, rows, cols })
    }

    /// Payload size in bytes, or `None` if it does not fit in memory.
    pub fn payload_len(&self) -> Option<usize> {
        let rows = usize::try_from(self.rows).ok()?;
        let cols = usize::try_from(self.cols).ok()?;
        rows.checked_mul(cols)?.checked_mul(4)
    }
}

/// Serializes a matrix: header then row-major little-endian payload.
pub fn encode(m: &EmbeddingMatrix) -> Vec<u8> {
    let header = EmbHeader {
        role: m.role(),
        rows: m.rows() as u64,
        cols: m.cols() as u64,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + m.data().len() * 4);
    out.extend_from_slice(&header.to_bytes());
    for v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses a complete `.cemb` buffer. Trailing or missing payload bytes are
/// rejected, never truncated.
pub fn decode(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    let header = EmbHeader::parse(bytes)?;
    let payload = &bytes[HEADER_LEN..];
    let expected = header
        .payload_len()
        .ok_or(Error::Format("rows * cols overflows"))?;
    if payload.len() != expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    EmbeddingMatrix::new(header.role, header.rows as usize, header.cols as usize, data)
}
