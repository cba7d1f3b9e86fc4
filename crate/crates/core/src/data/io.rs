//! Binary dataset file: `"HFLD" | version u8 | n u64 | d u64 | labels u8`,
//! then `n·d` little-endian `f32` row-major, then `n` label bytes.

use std::fs;
use std::path::Path;

use super::{DataError, Dataset};

pub const DATASET_MAGIC: [u8; 4] = *b"HFLD";
pub const DATASET_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 8 + 8 + 1;

fn encode(ds: &Dataset) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + ds.features().len() * 4 + ds.len());
    buf.extend_from_slice(&DATASET_MAGIC);
    buf.push(DATASET_VERSION);
    buf.extend_from_slice(&(ds.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(ds.dim() as u64).to_le_bytes());
    buf.push(1);
    for v in ds.features() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(ds.labels());
    buf
}

fn decode(bytes: &[u8], feature_names: Option<Vec<String>>) -> Result<Dataset, DataError> {
    let fmt = |m: &str| DataError::Format(m.to_string());
    if bytes.len() < HEADER_LEN {
        return Err(fmt("truncated header"));
    }
    if bytes[..4] != DATASET_MAGIC {
        return Err(fmt("bad magic"));
    }
    if bytes[4] != DATASET_VERSION {
        return Err(DataError::Format(format!("unsupported version {}", bytes[4])));
    }
    let n = u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes")) as usize;
    let d = u64::from_le_bytes(bytes[13..21].try_into().expect("8 bytes")) as usize;
    if bytes[21] != 1 {
        return Err(fmt("file carries no labels"));
    }
    let expected = n
        .checked_mul(d)
        .and_then(|nd| nd.checked_mul(4))
        .and_then(|b| b.checked_add(HEADER_LEN + n));
    if expected != Some(bytes.len()) {
        return Err(DataError::Format(format!(
            "{} bytes do not hold {n} rows of {d} features",
            bytes.len()
        )));
    }
    let body = &bytes[HEADER_LEN..HEADER_LEN + n * d * 4];
    let features = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    let labels = bytes[HEADER_LEN + n * d * 4..].to_vec();
    let names = match feature_names {
        Some(names) if names.len() == d => names,
        Some(names) => {
            return Err(DataError::Schema(format!(
                "{} feature names for a {d}-column file",
                names.len()
            )))
        }
        None => (0..d).map(|j| format!("f{j}")).collect(),
    };
    Dataset::new(features, labels, names)
}

pub fn write_dataset(path: impl AsRef<Path>, ds: &Dataset) -> Result<(), DataError> {
    let path = path.as_ref();
    fs::write(path, encode(ds)).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a dataset file. Feature names are not stored in the file; pass them
/// to restore them, or get `f0…f{d-1}`.
pub fn read_dataset(path: impl AsRef<Path>, feature_names: Option<Vec<String>>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes, feature_names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Dataset {
        Dataset::new(vec![1.0, -0.0, 2.5, 3.0], vec![1, 0], vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample());
        assert_eq!(&bytes[..4], b"HFLD");
        assert_eq!(bytes[4], 1);
        assert_eq!(&bytes[5..13], &2u64.to_le_bytes());
        assert_eq!(&bytes[13..21], &2u64.to_le_bytes());
        assert_eq!(bytes[21], 1);
        assert_eq!(&bytes[22..26], &1.0f32.to_le_bytes());
        assert_eq!(&bytes[bytes.len() - 2..], &[1, 0]);
        assert_eq!(bytes.len(), 22 + 16 + 2);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.hfld");
        write_dataset(&path, &sample()).unwrap();
        let back = read_dataset(&path, Some(vec!["a".into(), "b".into()])).unwrap();
        assert_eq!(back, sample());
        assert_eq!(back.features()[1].to_bits(), (-0.0f32).to_bits());
    }

    #[test]
    fn rejects_truncation_and_bad_magic() {
        let mut bytes = encode(&sample());
        assert!(decode(&bytes[..bytes.len() - 1], None).is_err());
        bytes[0] = b'X';
        assert!(decode(&bytes, None).is_err());
    }
}
