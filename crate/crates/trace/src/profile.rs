//! Leakage profiles: per-kind base patterns and noise parameters.

use std::f32::consts::TAU;
use std::str::FromStr;

use ladderlab_core::OpKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileScale {
    /// Desk-scale lengths for fast experiments.
    Small,
    /// Lengths in the ballpark of real acquisitions.
    Paper,
}

impl ProfileScale {
    pub fn name(self) -> &'static str {
        match self {
            ProfileScale::Small => "small",
            ProfileScale::Paper => "paper",
        }
    }
}

impl FromStr for ProfileScale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(ProfileScale::Small),
            "paper" => Ok(ProfileScale::Paper),
            other => Err(format!("unknown profile scale: {other}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LeakageProfile {
    pub id: String,
    pub base_mul: Vec<f32>,
    pub base_add: Vec<f32>,
    pub base_sub: Vec<f32>,
    /// Appended to an add/sub segment when its conditional reduction fired.
    pub extension: Vec<f32>,
    pub sigma: f32,
    /// Maximum per-operation length perturbation, in samples.
    pub jitter_max: u32,
}

impl LeakageProfile {
    pub fn base_pattern(&self, kind: OpKind) -> &[f32] {
        match kind {
            OpKind::Mul => &self.base_mul,
            OpKind::Add => &self.base_add,
            OpKind::Sub => &self.base_sub,
        }
    }

    /// Segment length before jitter.
    pub fn nominal_len(&self, kind: OpKind, extended: bool) -> usize {
        self.base_pattern(kind).len() + if extended { self.extension.len() } else { 0 }
    }
}

fn wave(len: usize, level: f32, amp: f32, period: f32, phase: f32) -> Vec<f32> {
    (0..len)
        .map(|t| level + amp * (TAU * t as f32 / period + phase).sin())
        .collect()
}

/// Built-in profiles. The three kinds sit on separated amplitude bands
/// (over 2 sigma apart everywhere) so a template matcher can tell them apart
/// on noiseless data; the long multiplication pattern dwarfs the short ones.
pub fn default_profile(scale: ProfileScale) -> LeakageProfile {
    let (m_len, s_len, ext_len, jitter_max) = match scale {
        ProfileScale::Small => (120, 24, 12, 1),
        ProfileScale::Paper => (1200, 150, 60, 3),
    };
    LeakageProfile {
        id: scale.name().to_string(),
        base_mul: wave(m_len, 24.0, 4.0, 16.0, 0.0),
        base_add: wave(s_len, 6.0, 2.5, 8.0, 0.0),
        base_sub: wave(s_len, 13.0, 2.5, 8.0, 1.0),
        extension: wave(ext_len, 17.5, 1.5, 6.0, 0.0),
        sigma: 1.5,
        jitter_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_hold_at_both_scales() {
        for scale in [ProfileScale::Small, ProfileScale::Paper] {
            let p = default_profile(scale);
            assert_eq!(p.sigma, 1.5);
            assert!(p.base_mul.len() > p.base_add.len());
            assert!(p.base_mul.len() > p.base_sub.len());
            assert!(p.extension.len() < p.base_sub.len());
        }
    }

    /// Nearest-template classification of each noiseless pattern must be
    /// perfect, including patterns carrying the reduction extension.
    #[test]
    fn noiseless_patterns_are_separable() {
        for scale in [ProfileScale::Small, ProfileScale::Paper] {
            let p = default_profile(scale);
            let kinds = [OpKind::Add, OpKind::Sub, OpKind::Mul];
            let classify = |window: &[f32]| {
                kinds
                    .iter()
                    .min_by(|&&a, &&b| {
                        let dist = |k: OpKind| {
                            let t = p.base_pattern(k);
                            let n = t.len().min(window.len());
                            window[..n]
                                .iter()
                                .zip(&t[..n])
                                .map(|(x, y)| (x - y) * (x - y))
                                .sum::<f32>()
                                / n as f32
                        };
                        dist(a).partial_cmp(&dist(b)).unwrap()
                    })
                    .copied()
                    .unwrap()
            };
            for kind in kinds {
                assert_eq!(classify(p.base_pattern(kind)), kind);
                if kind != OpKind::Mul {
                    let mut extended = p.base_pattern(kind).to_vec();
                    extended.extend_from_slice(&p.extension);
                    assert_eq!(classify(&extended), kind);
                }
            }
            // Every pair of base patterns stays more than 2 sigma apart in
            // mean absolute difference.
            for (i, &a) in kinds.iter().enumerate() {
                for &b in &kinds[i + 1..] {
                    let pa = p.base_pattern(a);
                    let pb = p.base_pattern(b);
                    let n = pa.len().min(pb.len());
                    let mad = pa[..n]
                        .iter()
                        .zip(&pb[..n])
                        .map(|(x, y)| (x - y).abs())
                        .sum::<f32>()
                        / n as f32;
                    assert!(mad > 2.0 * p.sigma, "{a:?} vs {b:?}: {mad}");
                }
            }
        }
    }
}
