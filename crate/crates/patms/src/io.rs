//! Binary array files and CSV metrics.
//!
//! Array files carry the magic `AFB1`, a little-endian `u32` rank, the
//! dimensions as little-endian `u64`, and the payload as row-major IEEE-754
//! binary64 little-endian. Readers reject wrong magic, truncated payloads,
//! and trailing bytes. All writers go through a temp-file-plus-rename so
//! partially written outputs never appear under the target name.

use crate::{Error, Result};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

const MAGIC: &[u8; 4] = b"AFB1";
const MAX_RANK: u32 = 8;

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

fn temp_sibling(path: &Path) -> PathBuf {
    let stamp = TEMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".tmp.{}.{}", std::process::id(), stamp));
    path.with_file_name(name)
}

/// Atomically replace `path` with `bytes`.
pub fn write_bytes_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Write a row-major array file.
pub fn write_array(path: &Path, dims: &[usize], data: &[f64]) -> Result<()> {
    let expected: usize = dims.iter().product();
    if expected != data.len() {
        return Err(Error::DimensionMismatch {
            context: "write_array",
            expected,
            got: data.len(),
        });
    }
    assert!(dims.len() as u32 <= MAX_RANK, "rank too large");
    let mut bytes = Vec::with_capacity(4 + 4 + 8 * dims.len() + 8 * data.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        bytes.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes_atomic(path, &bytes)
}

/// Read an array file, validating magic, rank, and exact payload length.
pub fn read_array(path: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 {
        return Err(Error::Format("file shorter than header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic (expected AFB1)".into()));
    }
    let rank = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if rank == 0 || rank > MAX_RANK {
        return Err(Error::Format(format!("unsupported rank {rank}")));
    }
    let dims_end = 8 + 8 * rank as usize;
    if bytes.len() < dims_end {
        return Err(Error::Format("truncated dimension table".into()));
    }
    let mut dims = Vec::with_capacity(rank as usize);
    for i in 0..rank as usize {
        let off = 8 + 8 * i;
        let d = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        dims.push(d as usize);
    }
    let count: usize = dims.iter().product();
    let expected_len = dims_end + 8 * count;
    if bytes.len() != expected_len {
        return Err(Error::Format(format!(
            "payload length {} does not match dims (expected {expected_len} bytes)",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(count);
    for i in 0..count {
        let off = dims_end + 8 * i;
        data.push(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
    }
    Ok((dims, data))
}

/// Write `key,value` metrics with a header row and LF line endings.
pub fn write_metrics_csv(path: &Path, rows: &[(String, String)]) -> Result<()> {
    let mut text = String::from("key,value\n");
    for (k, v) in rows {
        text.push_str(k);
        text.push(',');
        text.push_str(v);
        text.push('\n');
    }
    write_bytes_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.afb");

        fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(read_array(&path), Err(Error::Format(_))));

        // valid header, truncated payload
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_array(&path), Err(Error::Format(_))));

        assert!(matches!(read_array(&dir.path().join("missing.afb")), Err(Error::Io(_))));
    }

    #[test]
    fn metrics_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_metrics_csv(
            &path,
            &[("rel_l2_error".into(), "0.125".into()), ("iters_scale_0".into(), "42".into())],
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "key,value\nrel_l2_error,0.125\niters_scale_0,42\n");
    }

    proptest! {
        #[test]
        fn array_roundtrip(
            rows in 1usize..6,
            cols in 1usize..6,
            seed in any::<u64>(),
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.afb");
            let mut state = seed;
            let data: Vec<f64> = (0..rows * cols)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    f64::from_bits((state >> 12) | 0x3FF0000000000000) - 1.5
                })
                .collect();
            write_array(&path, &[rows, cols], &data).unwrap();
            let (dims, back) = read_array(&path).unwrap();
            prop_assert_eq!(dims, vec![rows, cols]);
            prop_assert_eq!(back, data);
        }
    }
}
