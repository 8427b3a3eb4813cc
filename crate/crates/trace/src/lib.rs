//! Synthetic power traces from ladder operation logs.
//!
//! Each logged modular operation contributes one segment: a deterministic
//! base pattern per operation kind, an extension segment when a conditional
//! reduction fired, per-operation length jitter, and i.i.d. Gaussian noise on
//! every sample. Labels record the exact final segment boundaries.

mod format;
mod profile;
mod synth;

pub use format::{read_labels, read_trace, write_labels, write_trace, TRACE_MAGIC, TRACE_VERSION};
pub use profile::{default_profile, LeakageProfile, ProfileScale};
pub use synth::{synthesize, synthesize_prefix, PowerTrace, SegmentLabel, TraceMeta};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("empty operation log")]
    EmptyLog,
    #[error("malformed trace file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
