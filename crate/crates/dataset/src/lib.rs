//! Sliding-window segmentation, labeling, balancing, and persistence.
//!
//! Windows are fixed-size slices taken at a fixed stride. A window is tagged
//! true ("short operation") when the fraction of its samples lying inside
//! add/sub segments exceeds the configured threshold; multiplication samples
//! and everything else count against it.

mod format;

pub use format::{load_dataset, save_dataset, DATASET_MAGIC, DATASET_VERSION};

use ladderlab_trace::{PowerTrace, SegmentLabel};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("trace shorter than one window ({len} < {w})")]
    TraceTooShort { len: usize, w: usize },
    #[error("window size and stride must be positive")]
    BadGeometry,
    #[error("balancing requires both classes to be present")]
    EmptyClass,
    #[error("split ratio must be in (0, 1)")]
    BadRatio,
    #[error("malformed dataset file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub samples: Vec<f32>,
    /// true = short-operation content dominates per the labeling rule.
    pub label: bool,
    /// Trace id the window came from.
    pub origin: u32,
    /// Sample offset of the window start within its trace.
    pub start: u64,
}

/// Labeling rule: a window is true when strictly more than
/// `min_so_fraction` of its samples lie inside add/sub segments.
///
/// The default threshold of 0.2 keeps isolated single short operations
/// (shorter than half a window) visible to the classifier; a majority rule
/// would erase them and with them the collision positions the attack needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRule {
    pub min_so_fraction: f32,
}

impl Default for LabelRule {
    fn default() -> Self {
        LabelRule {
            min_so_fraction: 0.2,
        }
    }
}

/// Number of windows of size `w` at stride `stride` in a trace of `n`
/// samples: floor((n - w) / stride) + 1. Remainder samples are dropped.
pub fn window_count(n: u64, w: u64, stride: u64) -> u64 {
    debug_assert!(n >= w && w > 0 && stride > 0);
    (n - w) / stride + 1
}

/// Prefix-sum index over the short-operation sample coverage of a trace,
/// for O(log n) overlap queries.
#[derive(Debug, Clone)]
pub struct SoCoverage {
    starts: Vec<u64>,
    ends: Vec<u64>,
    cum: Vec<u64>,
}

impl SoCoverage {
    pub fn from_labels(labels: &[SegmentLabel]) -> Self {
        let mut starts = Vec::new();
        let mut ends = Vec::new();
        let mut cum = vec![0u64];
        for l in labels {
            if l.op_kind().map(|k| k.is_short()).unwrap_or(false) {
                starts.push(l.start);
                ends.push(l.end);
                cum.push(cum.last().unwrap() + (l.end - l.start));
            }
        }
        SoCoverage { starts, ends, cum }
    }

    /// Total short-operation samples inside [a, b).
    pub fn overlap(&self, a: u64, b: u64) -> u64 {
        if b <= a || self.starts.is_empty() {
            return 0;
        }
        let i0 = self.ends.partition_point(|&e| e <= a);
        let i1 = self.starts.partition_point(|&s| s < b);
        if i0 >= i1 {
            return 0;
        }
        let mut total = self.cum[i1] - self.cum[i0];
        if self.starts[i0] < a {
            total -= a - self.starts[i0];
        }
        if self.ends[i1 - 1] > b {
            total -= self.ends[i1 - 1] - b;
        }
        total
    }
}

/// Label for the window starting at `start`: true iff the short-operation
/// coverage strictly exceeds the rule threshold.
pub fn label_window(coverage: &SoCoverage, start: u64, w: usize, rule: LabelRule) -> bool {
    let so = coverage.overlap(start, start + w as u64) as f32;
    so > rule.min_so_fraction * w as f32
}

/// Slice a trace into unlabeled windows at starts 0, stride, 2*stride, ...
pub fn slice_windows(
    trace: &PowerTrace,
    w: usize,
    stride: usize,
) -> Result<Vec<Window>, DatasetError> {
    if w == 0 || stride == 0 {
        return Err(DatasetError::BadGeometry);
    }
    if trace.samples.len() < w {
        return Err(DatasetError::TraceTooShort {
            len: trace.samples.len(),
            w,
        });
    }
    let count = window_count(trace.samples.len() as u64, w as u64, stride as u64) as usize;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let start = i * stride;
        out.push(Window {
            samples: trace.samples[start..start + w].to_vec(),
            label: false,
            origin: trace.meta.trace_id,
            start: start as u64,
        });
    }
    Ok(out)
}

/// Slice and label in one pass.
pub fn slice_and_label(
    trace: &PowerTrace,
    w: usize,
    stride: usize,
    rule: LabelRule,
) -> Result<Vec<Window>, DatasetError> {
    let mut windows = slice_windows(trace, w, stride)?;
    let coverage = SoCoverage::from_labels(&trace.labels);
    for win in &mut windows {
        win.label = label_window(&coverage, win.start, w, rule);
    }
    Ok(windows)
}

/// Downsample the majority class uniformly at random (seeded) so both
/// classes have equal counts. Input order is preserved.
pub fn balance(windows: Vec<Window>, seed: u64) -> Result<Vec<Window>, DatasetError> {
    let n_true = windows.iter().filter(|w| w.label).count();
    let n_false = windows.len() - n_true;
    if n_true == 0 || n_false == 0 {
        return Err(DatasetError::EmptyClass);
    }
    let (majority, keep) = if n_true > n_false {
        (true, n_false)
    } else {
        (false, n_true)
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut majority_idx: Vec<usize> = windows
        .iter()
        .enumerate()
        .filter(|(_, w)| w.label == majority)
        .map(|(i, _)| i)
        .collect();
    majority_idx.shuffle(&mut rng);
    majority_idx.truncate(keep);
    let mut selected: Vec<bool> = windows.iter().map(|w| w.label != majority).collect();
    for i in majority_idx {
        selected[i] = true;
    }
    Ok(windows
        .into_iter()
        .zip(selected)
        .filter(|(_, s)| *s)
        .map(|(w, _)| w)
        .collect())
}

#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<Window>,
    pub test: Vec<Window>,
    pub ratio: f32,
}

impl DatasetSplit {
    pub fn class_counts(windows: &[Window]) -> (usize, usize) {
        let t = windows.iter().filter(|w| w.label).count();
        (t, windows.len() - t)
    }
}

/// Stratified train/test split: each class is shuffled (seeded) and divided
/// at the ratio independently, so class balance carries over to both sides.
pub fn split(windows: Vec<Window>, ratio: f32, seed: u64) -> Result<DatasetSplit, DatasetError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DatasetError::BadRatio);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = windows
            .iter()
            .enumerate()
            .filter(|(_, w)| w.label == class)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng);
        let n_train = (idx.len() as f64 * ratio as f64).round() as usize;
        for (pos, i) in idx.into_iter().enumerate() {
            if pos < n_train {
                train.push(i);
            } else {
                test.push(i);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    let mut windows: Vec<Option<Window>> = windows.into_iter().map(Some).collect();
    let take = |ids: Vec<usize>, pool: &mut Vec<Option<Window>>| {
        ids.into_iter()
            .map(|i| pool[i].take().expect("unique index"))
            .collect::<Vec<_>>()
    };
    Ok(DatasetSplit {
        train: take(train, &mut windows),
        test: take(test, &mut windows),
        ratio,
    })
}
