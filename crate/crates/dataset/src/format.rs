//! On-disk dataset format.
//!
//! Magic "SCDS", version u16 LE, u32 window size, u32 stride, u64 window
//! count, then per window: u8 label, W samples as f32 LE, u32 origin id,
//! u64 start offset.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{DatasetError, Window};

pub const DATASET_MAGIC: &[u8; 4] = b"SCDS";
pub const DATASET_VERSION: u16 = 1;

pub fn save_dataset(
    path: &Path,
    windows: &[Window],
    w: usize,
    stride: usize,
) -> Result<(), DatasetError> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(DATASET_MAGIC)?;
    out.write_all(&DATASET_VERSION.to_le_bytes())?;
    out.write_all(&(w as u32).to_le_bytes())?;
    out.write_all(&(stride as u32).to_le_bytes())?;
    out.write_all(&(windows.len() as u64).to_le_bytes())?;
    for win in windows {
        if win.samples.len() != w {
            return Err(DatasetError::Malformed(format!(
                "window of {} samples in a {w}-sample dataset",
                win.samples.len()
            )));
        }
        out.write_all(&[win.label as u8])?;
        for s in &win.samples {
            out.write_all(&s.to_le_bytes())?;
        }
        out.write_all(&win.origin.to_le_bytes())?;
        out.write_all(&win.start.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Returns (windows, window size, stride).
pub fn load_dataset(path: &Path) -> Result<(Vec<Window>, usize, usize), DatasetError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DATASET_MAGIC {
        return Err(DatasetError::Malformed("bad magic".into()));
    }
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    if u16::from_le_bytes(b2) != DATASET_VERSION {
        return Err(DatasetError::Malformed("unsupported version".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let w = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let stride = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;

    let mut windows = Vec::with_capacity(count);
    let mut b1 = [0u8; 1];
    for _ in 0..count {
        r.read_exact(&mut b1)?;
        let label = match b1[0] {
            0 => false,
            1 => true,
            other => {
                return Err(DatasetError::Malformed(format!("bad label byte {other}")));
            }
        };
        let mut samples = vec![0f32; w];
        for s in &mut samples {
            r.read_exact(&mut b4)?;
            *s = f32::from_le_bytes(b4);
        }
        r.read_exact(&mut b4)?;
        let origin = u32::from_le_bytes(b4);
        r.read_exact(&mut b8)?;
        let start = u64::from_le_bytes(b8);
        windows.push(Window {
            samples,
            label,
            origin,
            start,
        });
    }
    Ok((windows, w, stride))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_identical() {
        let windows: Vec<Window> = (0..17)
            .map(|i| Window {
                samples: (0..8).map(|j| (i * 8 + j) as f32 * 0.25).collect(),
                label: i % 3 == 0,
                origin: i as u32 % 4,
                start: (i * 10) as u64,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.scds");
        save_dataset(&path, &windows, 8, 10).unwrap();
        let (back, w, stride) = load_dataset(&path).unwrap();
        assert_eq!((w, stride), (8, 10));
        assert_eq!(back, windows);
    }
}
