//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 4    | magic `MSKT`                             |
//! | 4      | 2    | major version                            |
//! | 6      | 2    | minor version                            |
//! | 8      | 8    | time (`f64`)                             |
//! | 16     | 8    | `n_points` (`u64`)                       |
//! | 24     | 8    | domain length (`f64`)                    |
//! | 32     | 8    | sigma (`f64`)                            |
//! | 40     | 8    | g_rho (`f64`)                            |
//! | 48     | 8    | mobility (`f64`)                         |
//! | 56     | 8n   | samples at `x_j = jL/n` (`f64`)          |
//! | 56+8n  | 8    | FNV-1a 64 of bytes `0..56+8n` (`u64`)    |
//!
//! Readers accept any minor version of their major version.

use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use muskat_core::{Field, Grid, Params};

use crate::error::{IoError, Result};

pub const MAGIC: [u8; 4] = *b"MSKT";
pub const VERSION_MAJOR: u16 = 1;
pub const VERSION_MINOR: u16 = 0;
const HEADER_LEN: usize = 56;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub time: f64,
    pub params: Params,
}

fn checksum(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

pub fn encode(field: &Field, meta: &SnapshotMeta) -> Vec<u8> {
    let n = field.len();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n + 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION_MAJOR.to_le_bytes());
    out.extend_from_slice(&VERSION_MINOR.to_le_bytes());
    out.extend_from_slice(&meta.time.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&field.grid().length().to_le_bytes());
    out.extend_from_slice(&meta.params.sigma.to_le_bytes());
    out.extend_from_slice(&meta.params.g_rho.to_le_bytes());
    out.extend_from_slice(&meta.params.mobility.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let sum = checksum(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    let mut a = [0u8; 8];
    a.copy_from_slice(&b[at..at + 8]);
    u64::from_le_bytes(a)
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_bits(u64_at(b, at))
}

pub fn decode(bytes: &[u8]) -> Result<(Field, SnapshotMeta)> {
    if bytes.len() < 8 || bytes[..4] != MAGIC {
        return Err(IoError::BadMagic);
    }
    let (major, minor) = (u16_at(bytes, 4), u16_at(bytes, 6));
    if major > VERSION_MAJOR {
        return Err(IoError::FutureVersion { found_major: major, found_minor: minor, supported: VERSION_MAJOR });
    }
    if major < VERSION_MAJOR {
        return Err(IoError::Malformed(format!("unsupported legacy version {major}.{minor}")));
    }
    if bytes.len() < HEADER_LEN + 8 {
        return Err(IoError::Malformed(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let n = u64_at(bytes, 16);
    let expected = (n as usize).checked_mul(8).and_then(|p| p.checked_add(HEADER_LEN + 8));
    if expected != Some(bytes.len()) {
        return Err(IoError::Malformed(format!("header announces {n} samples but the file has {} bytes", bytes.len())));
    }
    let body = bytes.len() - 8;
    let stored = u64_at(bytes, body);
    let computed = checksum(&bytes[..body]);
    if stored != computed {
        return Err(IoError::Checksum { stored, computed });
    }
    let meta = SnapshotMeta {
        time: f64_at(bytes, 8),
        params: Params { sigma: f64_at(bytes, 32), g_rho: f64_at(bytes, 40), mobility: f64_at(bytes, 48) },
    };
    let length = f64_at(bytes, 24);
    let values: Vec<f64> = (0..n as usize).map(|j| f64_at(bytes, HEADER_LEN + 8 * j)).collect();
    let grid = Grid::new(n as usize, length)?;
    let field = Field::from_values(&grid, values)?;
    Ok((field, meta))
}

pub fn save_snapshot(field: &Field, meta: &SnapshotMeta, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(field, meta)).map_err(|e| IoError::file(path, e))
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<(Field, SnapshotMeta)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| IoError::file(path, e))?;
    decode(&bytes)
}
