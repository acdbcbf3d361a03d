//! STTN binary tensor files.
//!
//! Layout, all little-endian:
//! magic `"STTN"` | u8 version = 1 | u8 dtype = 1 (f32) | u8 rank |
//! rank x u32 dims | row-major f32 payload. Round-trips are bit-exact.

use std::fs;
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::vitcore::{TokenTensor, Video};

pub(crate) const MAGIC: [u8; 4] = *b"STTN";
const VERSION: u8 = 1;
const DTYPE_F32: u8 = 1;

/// Write bytes to a sibling temp file, then rename into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp-write");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn encode_tensor(dims: &[u32], data: &[f32]) -> Result<Vec<u8>> {
    let expected: usize = dims.iter().map(|&d| d as usize).product();
    if expected != data.len() {
        return Err(Error::Shape(format!(
            "dims {dims:?} declare {expected} values, got {}",
            data.len()
        )));
    }
    let mut out = Vec::with_capacity(7 + dims.len() * 4 + data.len() * 4);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(DTYPE_F32);
    out.push(dims.len() as u8);
    for &d in dims {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for &v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_tensor(bytes: &[u8]) -> Result<(Vec<u32>, Vec<f32>)> {
    let mut cursor = 0usize;
    let take = |cursor: &mut usize, n: usize, field: &'static str| -> Result<&[u8]> {
        if bytes.len() < *cursor + n {
            return Err(FormatError::Header { field }.into());
        }
        let slice = &bytes[*cursor..*cursor + n];
        *cursor += n;
        Ok(slice)
    };

    let magic = take(&mut cursor, 4, "magic")?;
    if magic != MAGIC {
        return Err(FormatError::Magic {
            found: [magic[0], magic[1], magic[2], magic[3]],
        }
        .into());
    }
    let version = take(&mut cursor, 1, "version")?[0];
    if version != VERSION {
        return Err(FormatError::Version { found: version }.into());
    }
    let dtype = take(&mut cursor, 1, "dtype")?[0];
    if dtype != DTYPE_F32 {
        return Err(FormatError::Dtype { found: dtype }.into());
    }
    let rank = take(&mut cursor, 1, "rank")?[0] as usize;
    let mut dims = Vec::with_capacity(rank);
    for _ in 0..rank {
        let raw = take(&mut cursor, 4, "dims")?;
        dims.push(u32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]));
    }
    let expected: usize = dims.iter().map(|&d| d as usize).product();
    let payload = &bytes[cursor..];
    let found = payload.len() / 4;
    if found < expected || !payload.len().is_multiple_of(4) {
        return Err(FormatError::Truncated { expected, found }.into());
    }
    if found > expected {
        return Err(FormatError::Trailing {
            extra: payload.len() - expected * 4,
        }
        .into());
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((dims, data))
}

pub fn write_tensor(path: &Path, dims: &[u32], data: &[f32]) -> Result<()> {
    atomic_write(path, &encode_tensor(dims, data)?)
}

pub fn read_tensor(path: &Path) -> Result<(Vec<u32>, Vec<f32>)> {
    decode_tensor(&fs::read(path)?)
}

pub fn write_video32(path: &Path, video: &Video<f32>) -> Result<()> {
    let dims = [
        video.frames as u32,
        video.height as u32,
        video.width as u32,
        3,
    ];
    write_tensor(path, &dims, &video.data)
}

pub fn read_video32(path: &Path) -> Result<Video<f32>> {
    let (dims, data) = read_tensor(path)?;
    if dims.len() != 4 || dims[3] != 3 {
        return Err(Error::Shape(format!(
            "expected rank-4 TxHxWx3 video tensor, got dims {dims:?}"
        )));
    }
    Video::new(dims[0] as usize, dims[1] as usize, dims[2] as usize, data)
}

pub fn write_tokens32(path: &Path, tokens: &TokenTensor<f32>) -> Result<()> {
    let dims = [tokens.n_t() as u32, tokens.n_s() as u32, tokens.d() as u32];
    write_tensor(path, &dims, tokens.data())
}

pub fn read_tokens32(path: &Path) -> Result<TokenTensor<f32>> {
    let (dims, data) = read_tensor(path)?;
    if dims.len() != 3 {
        return Err(Error::Shape(format!(
            "expected rank-3 token tensor, got dims {dims:?}"
        )));
    }
    TokenTensor::new(dims[0] as usize, dims[1] as usize, dims[2] as usize, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let dims = [2u32, 3, 4];
        let data: Vec<f32> = (0..24).map(|i| (i as f32) * 0.37 - 2.1).collect();
        let bytes = encode_tensor(&dims, &data).unwrap();
        let (d2, v2) = decode_tensor(&bytes).unwrap();
        assert_eq!(d2, dims);
        assert_eq!(v2.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   data.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn bad_magic_is_magic_error() {
        let mut bytes = encode_tensor(&[1], &[0.5]).unwrap();
        bytes[0] = b'X';
        match decode_tensor(&bytes) {
            Err(Error::Format(FormatError::Magic { found })) => {
                assert_eq!(&found, b"XTTN");
            }
            other => panic!("expected magic error, got {other:?}"),
        }
    }

    #[test]
    fn bad_version_and_dtype_are_distinct_errors() {
        let mut bytes = encode_tensor(&[1], &[0.5]).unwrap();
        bytes[4] = 9;
        assert!(matches!(
            decode_tensor(&bytes),
            Err(Error::Format(FormatError::Version { found: 9 }))
        ));
        let mut bytes = encode_tensor(&[1], &[0.5]).unwrap();
        bytes[5] = 7;
        assert!(matches!(
            decode_tensor(&bytes),
            Err(Error::Format(FormatError::Dtype { found: 7 }))
        ));
    }

    #[test]
    fn truncated_payload_reports_counts() {
        // Declare 2x3 but supply five floats.
        let good = encode_tensor(&[2, 3], &[0.0; 6]).unwrap();
        let bytes = &good[..good.len() - 4];
        match decode_tensor(bytes) {
            Err(Error::Format(FormatError::Truncated { expected, found })) => {
                assert_eq!(expected, 6);
                assert_eq!(found, 5);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = encode_tensor(&[2], &[1.0, 2.0]).unwrap();
        bytes.extend_from_slice(&[0, 0, 0, 0]);
        assert!(matches!(
            decode_tensor(&bytes),
            Err(Error::Format(FormatError::Trailing { extra: 4 }))
        ));
    }

    #[test]
    fn truncated_header_names_field() {
        let bytes = b"STTN\x01".to_vec();
        assert!(matches!(
            decode_tensor(&bytes),
            Err(Error::Format(FormatError::Header { field: "dtype" }))
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join("sta_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.sttn");
        let tokens = TokenTensor::new(2, 2, 3, (0..12).map(|i| i as f32).collect()).unwrap();
        write_tokens32(&path, &tokens).unwrap();
        let back = read_tokens32(&path).unwrap();
        assert_eq!(back, tokens);
        std::fs::remove_dir_all(&dir).ok();
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn arbitrary_round_trip(
                rows in 1u32..6,
                cols in 1u32..6,
                seed in 0u64..500,
            ) {
                let n = (rows * cols) as usize;
                let mut rng = crate::prng::stream(seed, "io.prop");
                let data: Vec<f32> = (0..n)
                    .map(|_| (crate::prng::uniform_f64(&mut rng) * 200.0 - 100.0) as f32)
                    .collect();
                let bytes = encode_tensor(&[rows, cols], &data).unwrap();
                let (dims, back) = decode_tensor(&bytes).unwrap();
                prop_assert_eq!(dims, vec![rows, cols]);
                let a: Vec<u32> = back.iter().map(|v| v.to_bits()).collect();
                let b: Vec<u32> = data.iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(a, b);
            }
        }
    }
}
