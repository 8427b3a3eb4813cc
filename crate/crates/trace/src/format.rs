//! On-disk trace format.
//!
//! Trace binary: magic "SCTR", version u16 LE, sample count u64 LE, then the
//! samples as 32-bit IEEE-754 little-endian. Labels live in a JSON Lines
//! sidecar, one segment per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::synth::{PowerTrace, SegmentLabel, TraceMeta};
use crate::TraceError;

pub const TRACE_MAGIC: &[u8; 4] = b"SCTR";
pub const TRACE_VERSION: u16 = 1;

pub fn write_trace(path: &Path, trace: &PowerTrace) -> Result<(), TraceError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(TRACE_MAGIC)?;
    w.write_all(&TRACE_VERSION.to_le_bytes())?;
    w.write_all(&(trace.samples.len() as u64).to_le_bytes())?;
    for s in &trace.samples {
        w.write_all(&s.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<PowerTrace, TraceError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != TRACE_MAGIC {
        return Err(TraceError::Malformed("bad magic".into()));
    }
    let mut v = [0u8; 2];
    r.read_exact(&mut v)?;
    if u16::from_le_bytes(v) != TRACE_VERSION {
        return Err(TraceError::Malformed("unsupported version".into()));
    }
    let mut c = [0u8; 8];
    r.read_exact(&mut c)?;
    let count = u64::from_le_bytes(c) as usize;
    let mut samples = vec![0f32; count];
    let mut buf = [0u8; 4];
    for s in &mut samples {
        r.read_exact(&mut buf)?;
        *s = f32::from_le_bytes(buf);
    }
    Ok(PowerTrace {
        samples,
        labels: Vec::new(),
        meta: TraceMeta::default(),
    })
}

pub fn write_labels(path: &Path, labels: &[SegmentLabel]) -> Result<(), TraceError> {
    let mut w = BufWriter::new(File::create(path)?);
    for label in labels {
        serde_json::to_writer(&mut w, label)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<SegmentLabel>, TraceError> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}
