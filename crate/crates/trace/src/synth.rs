//! Trace synthesis from an operation log.

use ladderlab_core::{LadderVariant, OpKind, OpLog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::profile::LeakageProfile;
use crate::TraceError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLabel {
    pub start: u64,
    pub end: u64,
    pub op_index: u32,
    pub kind: char,
    pub reduced: bool,
}

impl SegmentLabel {
    pub fn op_kind(&self) -> Option<OpKind> {
        OpKind::from_letter(self.kind)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceMeta {
    pub trace_id: u32,
    pub profile: String,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PowerTrace {
    pub samples: Vec<f32>,
    pub labels: Vec<SegmentLabel>,
    pub meta: TraceMeta,
}

impl PowerTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Stretch or shrink a segment by resampling at the nearest source sample.
fn resample_nearest(src: &[f32], new_len: usize) -> Vec<f32> {
    if new_len == src.len() {
        return src.to_vec();
    }
    (0..new_len)
        .map(|i| {
            let pos = (i as f64 + 0.5) * src.len() as f64 / new_len as f64;
            let idx = (pos as usize).min(src.len() - 1);
            src[idx]
        })
        .collect()
}

/// Synthesize the full trace for a log.
pub fn synthesize(
    log: &OpLog,
    profile: &LeakageProfile,
    seed: u64,
) -> Result<PowerTrace, TraceError> {
    synthesize_limit(log, profile, seed, usize::MAX)
}

/// Synthesize only the segments of the first `max_ops` operations. The
/// random streams are consumed in operation order, so the result is
/// bit-identical to the prefix of the full synthesis under the same seed.
pub fn synthesize_prefix(
    log: &OpLog,
    profile: &LeakageProfile,
    seed: u64,
    max_ops: usize,
) -> Result<PowerTrace, TraceError> {
    synthesize_limit(log, profile, seed, max_ops)
}

fn synthesize_limit(
    log: &OpLog,
    profile: &LeakageProfile,
    seed: u64,
    max_ops: usize,
) -> Result<PowerTrace, TraceError> {
    if log.is_empty() {
        return Err(TraceError::EmptyLog);
    }
    let mut jitter_rng = ChaCha12Rng::seed_from_u64(seed);
    jitter_rng.set_stream(0);
    let mut noise_rng = ChaCha12Rng::seed_from_u64(seed);
    noise_rng.set_stream(1);
    let noise = if profile.sigma > 0.0 {
        Some(Normal::new(0.0f32, profile.sigma).expect("valid sigma"))
    } else {
        None
    };

    let n_ops = log.len().min(max_ops);
    let mut samples = Vec::with_capacity(n_ops * profile.base_mul.len() / 2);
    let mut labels = Vec::with_capacity(n_ops);

    for event in log.events().iter().take(n_ops) {
        // Under the always-reduce countermeasure every short operation takes
        // the long (extended) duration; the label still records the
        // arithmetic condition.
        let extended = event.kind.is_short()
            && (event.reduced || log.variant == LadderVariant::AlwaysReduce);
        let base = profile.base_pattern(event.kind);
        let mut segment: Vec<f32>;
        if extended {
            segment = Vec::with_capacity(base.len() + profile.extension.len());
            segment.extend_from_slice(base);
            segment.extend_from_slice(&profile.extension);
        } else {
            segment = base.to_vec();
        }

        if profile.jitter_max > 0 {
            let j = jitter_rng.gen_range(-(profile.jitter_max as i64)..=profile.jitter_max as i64);
            let new_len = (segment.len() as i64 + j).max(1) as usize;
            segment = resample_nearest(&segment, new_len);
        }

        if let Some(dist) = &noise {
            for s in &mut segment {
                *s += dist.sample(&mut noise_rng);
            }
        }

        let start = samples.len() as u64;
        samples.extend_from_slice(&segment);
        labels.push(SegmentLabel {
            start,
            end: samples.len() as u64,
            op_index: event.index,
            kind: event.kind.letter(),
            reduced: event.reduced,
        });
    }

    Ok(PowerTrace {
        samples,
        labels,
        meta: TraceMeta {
            trace_id: 0,
            profile: profile.id.clone(),
            seed,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{default_profile, ProfileScale};
    use ladderlab_core::{sample_nonce, scalar_mul, CurveParams, LadderVariant};

    fn tiny_log(kinds: &[(OpKind, bool)]) -> OpLog {
        // Build a log with chosen kinds/flags through the real arithmetic by
        // picking operand values that force the desired conditions.
        use ladderlab_core::Modulus;
        use num_bigint::BigUint;
        let m = Modulus::new("t", &BigUint::from(1_000_003u64)).unwrap();
        let mut log = OpLog::new("t", LadderVariant::Baseline);
        for &(kind, reduced) in kinds {
            match (kind, reduced) {
                (OpKind::Mul, _) => {
                    m.mul(&m.fe_u64(12345), &m.fe_u64(67), &mut log);
                }
                (OpKind::Add, false) => {
                    m.add(&m.fe_u64(1), &m.fe_u64(2), &mut log);
                }
                (OpKind::Add, true) => {
                    m.add(&m.fe_u64(1_000_002), &m.fe_u64(2), &mut log);
                }
                (OpKind::Sub, false) => {
                    m.sub(&m.fe_u64(5), &m.fe_u64(2), &mut log);
                }
                (OpKind::Sub, true) => {
                    m.sub(&m.fe_u64(2), &m.fe_u64(5), &mut log);
                }
            }
        }
        log
    }

    fn quiet(mut p: LeakageProfile) -> LeakageProfile {
        p.sigma = 0.0;
        p.jitter_max = 0;
        p
    }

    #[test]
    fn single_mul_is_the_base_pattern() {
        let p = quiet(default_profile(ProfileScale::Small));
        let log = tiny_log(&[(OpKind::Mul, false)]);
        let trace = synthesize(&log, &p, 1).unwrap();
        assert_eq!(trace.samples, p.base_mul);
        assert_eq!(trace.labels.len(), 1);
        assert_eq!(trace.labels[0].end, p.base_mul.len() as u64);
    }

    #[test]
    fn reduced_sub_gets_the_extension() {
        let p = quiet(default_profile(ProfileScale::Small));
        let log = tiny_log(&[(OpKind::Sub, true)]);
        let trace = synthesize(&log, &p, 1).unwrap();
        assert_eq!(
            trace.samples.len(),
            p.base_sub.len() + p.extension.len()
        );
    }

    #[test]
    fn always_reduce_extends_every_short_op() {
        let p = quiet(default_profile(ProfileScale::Small));
        let mut log = tiny_log(&[(OpKind::Sub, false), (OpKind::Add, false), (OpKind::Mul, false)]);
        log.variant = LadderVariant::AlwaysReduce;
        let trace = synthesize(&log, &p, 1).unwrap();
        let expect = p.base_sub.len() + p.extension.len() + p.base_add.len()
            + p.extension.len()
            + p.base_mul.len();
        assert_eq!(trace.samples.len(), expect);
        // Labels keep the arithmetic condition.
        assert!(!trace.labels[0].reduced);
    }

    #[test]
    fn labels_partition_the_trace() {
        let c = CurveParams::test_curve_p23();
        let mut rng = rand::rngs::mock::StepRng::new(42, 13);
        let k = sample_nonce(c, &mut rng);
        let (_, log) = scalar_mul(c, &k, &c.g, LadderVariant::Baseline, &mut rng).unwrap();
        let p = default_profile(ProfileScale::Small);
        let trace = synthesize(&log, &p, 7).unwrap();
        assert_eq!(trace.labels.len(), log.len());
        let mut cursor = 0u64;
        for (label, event) in trace.labels.iter().zip(log.events()) {
            assert_eq!(label.start, cursor);
            assert!(label.end > label.start);
            assert_eq!(label.op_index, event.index);
            assert_eq!(label.reduced, event.reduced);
            cursor = label.end;
        }
        assert_eq!(cursor, trace.samples.len() as u64);
    }

    #[test]
    fn seeded_synthesis_is_deterministic_and_prefix_stable() {
        let c = CurveParams::test_curve_p23();
        let mut rng = rand::rngs::mock::StepRng::new(7, 11);
        let k = sample_nonce(c, &mut rng);
        let (_, log) = scalar_mul(c, &k, &c.g, LadderVariant::Baseline, &mut rng).unwrap();
        let p = default_profile(ProfileScale::Small);
        let t1 = synthesize(&log, &p, 99).unwrap();
        let t2 = synthesize(&log, &p, 99).unwrap();
        assert_eq!(t1.samples, t2.samples);
        let prefix = synthesize_prefix(&log, &p, 99, 10).unwrap();
        assert_eq!(prefix.labels.len(), 10);
        let end = prefix.samples.len();
        assert_eq!(prefix.samples[..], t1.samples[..end]);
    }

    #[test]
    fn residual_noise_has_the_configured_moments() {
        let c = CurveParams::secp160r1();
        let mut rng = rand::rngs::mock::StepRng::new(3, 17);
        let k = sample_nonce(c, &mut rng);
        let (_, log) = scalar_mul(c, &k, &c.g, LadderVariant::Baseline, &mut rng).unwrap();

        let noisy_profile = {
            let mut p = default_profile(ProfileScale::Paper);
            p.jitter_max = 2;
            p
        };
        let clean_profile = {
            let mut p = noisy_profile.clone();
            p.sigma = 0.0;
            p
        };
        let noisy = synthesize(&log, &noisy_profile, 5).unwrap();
        let clean = synthesize(&log, &clean_profile, 5).unwrap();
        assert_eq!(noisy.samples.len(), clean.samples.len());
        assert!(noisy.samples.len() >= 1_000_000);
        let n = noisy.samples.len() as f64;
        let residual: Vec<f64> = noisy
            .samples
            .iter()
            .zip(&clean.samples)
            .map(|(a, b)| (a - b) as f64)
            .collect();
        let mean = residual.iter().sum::<f64>() / n;
        let var = residual.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var.sqrt() - 1.5).abs() < 0.05, "std {}", var.sqrt());
    }

    #[test]
    fn reduced_subs_outlast_plain_subs_under_jitter() {
        let p = default_profile(ProfileScale::Small);
        assert!((p.jitter_max as usize) < p.extension.len() / 2);
        let log = tiny_log(&[(OpKind::Sub, true), (OpKind::Sub, false)]);
        for seed in 0..50 {
            let t = synthesize(&log, &p, seed).unwrap();
            let d0 = t.labels[0].end - t.labels[0].start;
            let d1 = t.labels[1].end - t.labels[1].start;
            assert!(d0 > d1);
        }
    }
}
