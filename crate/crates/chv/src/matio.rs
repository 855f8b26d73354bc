//! Matrix file format. A fixed 16-byte header followed by row-major
//! little-endian f64 entries:
//!
//!   offset 0  magic "CHVM" (4 bytes)
//!   offset 4  version, u8 (currently 1)
//!   offset 5  provenance flag, u8: 1 = sampled from a recorded seed,
//!             0 = external data
//!   offset 6  reserved, u16, zero
//!   offset 8  m, u32 little-endian
//!   offset 12 n, u32 little-endian
//!
//! A 2x2 matrix therefore occupies exactly 48 bytes.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use std::path::Path;

const MAGIC: &[u8; 4] = b"CHVM";
const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Clone, Debug)]
pub struct MatrixFile {
    pub mat: Mat,
    /// Provenance flag from the header; the seed itself lives with
    /// whoever wrote the file.
    pub seeded: bool,
}

pub fn encode_matrix(mat: &Mat, seeded: bool) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * mat.rows() * mat.cols());
    buf.extend_from_slice(MAGIC);
    buf.push(VERSION);
    buf.push(seeded as u8);
    buf.extend_from_slice(&0u16.to_le_bytes());
    buf.extend_from_slice(&(mat.rows() as u32).to_le_bytes());
    buf.extend_from_slice(&(mat.cols() as u32).to_le_bytes());
    for &v in mat.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_matrix(bytes: &[u8]) -> Result<MatrixFile> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("matrix file shorter than its header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad matrix magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported matrix version {}", bytes[4])));
    }
    let seeded = match bytes[5] {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("bad provenance flag {other}"))),
    };
    let m = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if m == 0 || n == 0 {
        return Err(Error::Format("matrix dimensions must be positive".into()));
    }
    let expected = HEADER_LEN + 8 * m * n;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "payload length {} does not match {}x{} ({} bytes expected)",
            bytes.len(),
            m,
            n,
            expected
        )));
    }
    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(MatrixFile { mat: Mat::from_vec(m, n, data), seeded })
}

pub fn write_matrix(path: &Path, mat: &Mat, seeded: bool) -> Result<()> {
    std::fs::write(path, encode_matrix(mat, seeded))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<MatrixFile> {
    decode_matrix(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_layout() {
        let mat = Mat::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let bytes = encode_matrix(&mat, true);
        assert_eq!(bytes.len(), 48);
        assert_eq!(&bytes[0..4], b"CHVM");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 1);
        assert_eq!(&bytes[6..8], &[0, 0]);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        assert_eq!(&bytes[16..24], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[40..48], &4.0f64.to_le_bytes());
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let mat = Mat::from_vec(3, 5, (0..15).map(|i| (i as f64).sin()).collect());
        let bytes = encode_matrix(&mat, false);
        let back = decode_matrix(&bytes).unwrap();
        assert_eq!(back.mat, mat);
        assert!(!back.seeded);
        assert_eq!(encode_matrix(&back.mat, back.seeded), bytes);
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join("chv-matio-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.mat");
        let mat = Mat::from_vec(2, 3, vec![0.5, -1.0, 2.0, 3.5, -4.25, 6.0]);
        write_matrix(&path, &mat, true).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.mat, mat);
        assert!(back.seeded);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn malformed_inputs_rejected() {
        let mat = Mat::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let good = encode_matrix(&mat, false);
        assert!(decode_matrix(&good[..10]).is_err());
        assert!(decode_matrix(&good[..good.len() - 1]).is_err());
        let mut extra = good.clone();
        extra.push(0);
        assert!(decode_matrix(&extra).is_err());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(decode_matrix(&bad).is_err());
        let mut bad = good.clone();
        bad[4] = 9;
        assert!(decode_matrix(&bad).is_err());
        let mut bad = good;
        bad[5] = 7;
        assert!(decode_matrix(&bad).is_err());
    }
}
