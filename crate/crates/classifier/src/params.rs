//! Parameter tensors, initialization, and the flat ordering used both by the
//! model file and by the finite-difference tests.

use ndarray::{Array1, Array2};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::config::{Arch, NetworkConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// Gate weight matrices, each (units, features + units), acting on the
    /// concatenation [x_t, h_{t-1}].
    pub w_i: Array2<f64>,
    pub w_f: Array2<f64>,
    pub w_g: Array2<f64>,
    pub w_o: Array2<f64>,
    pub b_i: Array1<f64>,
    pub b_f: Array1<f64>,
    pub b_g: Array1<f64>,
    pub b_o: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub cfg: NetworkConfig,
    /// (kernel, filters)
    pub conv_w: Array2<f64>,
    pub conv_b: Array1<f64>,
    pub lstm: Option<LstmParams>,
    /// (dense_units, dense_input)
    pub dense_w: Array2<f64>,
    pub dense_b: Array1<f64>,
    /// (classes, dense_units)
    pub out_w: Array2<f64>,
    pub out_b: Array1<f64>,
    /// Input standardization constants baked in at training time.
    pub input_mean: f64,
    pub input_std: f64,
}

fn glorot(rng: &mut ChaCha12Rng, rows: usize, cols: usize, fan_in: usize, fan_out: usize) -> Array2<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-a, a);
    Array2::from_shape_fn((rows, cols), |_| dist.sample(rng))
}

impl Parameters {
    /// Seeded Glorot-uniform initialization; biases start at zero except the
    /// forget gate, which starts at 1.
    pub fn init(cfg: &NetworkConfig, seed: u64) -> Self {
        cfg.validate().expect("valid network configuration");
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let (k, f, u, d, c) = (
            cfg.conv_kernel,
            cfg.conv_filters,
            cfg.lstm_units,
            cfg.dense_units,
            cfg.classes,
        );
        let conv_w = glorot(&mut rng, k, f, k, f);
        let conv_b = Array1::zeros(f);
        let lstm = match cfg.arch {
            Arch::Lstm => {
                let input = f + u;
                let gate = |forget: bool, rng: &mut ChaCha12Rng| {
                    let w = glorot(rng, u, input, input, u);
                    let b = if forget {
                        Array1::ones(u)
                    } else {
                        Array1::zeros(u)
                    };
                    (w, b)
                };
                let (w_i, b_i) = gate(false, &mut rng);
                let (w_f, b_f) = gate(true, &mut rng);
                let (w_g, b_g) = gate(false, &mut rng);
                let (w_o, b_o) = gate(false, &mut rng);
                Some(LstmParams {
                    w_i,
                    w_f,
                    w_g,
                    w_o,
                    b_i,
                    b_f,
                    b_g,
                    b_o,
                })
            }
            Arch::Cnn => None,
        };
        let din = cfg.dense_input();
        let dense_w = glorot(&mut rng, d, din, din, d);
        let dense_b = Array1::zeros(d);
        let out_w = glorot(&mut rng, c, d, d, c);
        let out_b = Array1::zeros(c);
        Parameters {
            cfg: cfg.clone(),
            conv_w,
            conv_b,
            lstm,
            dense_w,
            dense_b,
            out_w,
            out_b,
            input_mean: 0.0,
            input_std: 1.0,
        }
    }

    pub fn zeros_like(cfg: &NetworkConfig) -> Self {
        let mut p = Parameters::init(cfg, 0);
        p.for_each_mut(|v| *v = 0.0);
        p
    }

    /// Visit every trainable scalar in the canonical order:
    /// conv_w, conv_b, [w_i, b_i, w_f, b_f, w_g, b_g, w_o, b_o,] dense_w,
    /// dense_b, out_w, out_b. Matrices are row-major.
    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for t in self.tensors_mut() {
            for v in t {
                f(v);
            }
        }
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        out.push(self.conv_w.as_slice_mut().unwrap());
        out.push(self.conv_b.as_slice_mut().unwrap());
        if let Some(l) = &mut self.lstm {
            out.push(l.w_i.as_slice_mut().unwrap());
            out.push(l.b_i.as_slice_mut().unwrap());
            out.push(l.w_f.as_slice_mut().unwrap());
            out.push(l.b_f.as_slice_mut().unwrap());
            out.push(l.w_g.as_slice_mut().unwrap());
            out.push(l.b_g.as_slice_mut().unwrap());
            out.push(l.w_o.as_slice_mut().unwrap());
            out.push(l.b_o.as_slice_mut().unwrap());
        }
        out.push(self.dense_w.as_slice_mut().unwrap());
        out.push(self.dense_b.as_slice_mut().unwrap());
        out.push(self.out_w.as_slice_mut().unwrap());
        out.push(self.out_b.as_slice_mut().unwrap());
        out
    }

    fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        out.push(self.conv_w.as_slice().unwrap());
        out.push(self.conv_b.as_slice().unwrap());
        if let Some(l) = &self.lstm {
            out.push(l.w_i.as_slice().unwrap());
            out.push(l.b_i.as_slice().unwrap());
            out.push(l.w_f.as_slice().unwrap());
            out.push(l.b_f.as_slice().unwrap());
            out.push(l.w_g.as_slice().unwrap());
            out.push(l.b_g.as_slice().unwrap());
            out.push(l.w_o.as_slice().unwrap());
            out.push(l.b_o.as_slice().unwrap());
        }
        out.push(self.dense_w.as_slice().unwrap());
        out.push(self.dense_b.as_slice().unwrap());
        out.push(self.out_w.as_slice().unwrap());
        out.push(self.out_b.as_slice().unwrap());
        out
    }

    /// Number of trainable scalars; independently enumerates the tensors.
    pub fn element_count(&self) -> u64 {
        self.tensors().iter().map(|t| t.len() as u64).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.element_count() as usize);
        for t in self.tensors() {
            out.extend_from_slice(t);
        }
        out
    }

    pub fn assign_flat(&mut self, flat: &[f64]) {
        let mut i = 0;
        self.for_each_mut(|v| {
            *v = flat[i];
            i += 1;
        });
        assert_eq!(i, flat.len(), "flat length mismatch");
    }

    /// Elementwise: self <- f(self, other), across all tensors.
    pub fn zip_apply(&mut self, other: &Parameters, f: impl Fn(f64, f64) -> f64 + Copy) {
        let theirs = other.to_flat();
        let mut i = 0;
        self.for_each_mut(|v| {
            *v = f(*v, theirs[i]);
            i += 1;
        });
    }

    pub fn add_assign(&mut self, other: &Parameters) {
        self.zip_apply(other, |a, b| a + b);
    }

    pub fn scale(&mut self, factor: f64) {
        self.for_each_mut(|v| *v *= factor);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{cnn_ablation, param_count, NetworkConfig};

    #[test]
    fn element_count_matches_formula() {
        // Independent enumeration of tensor elements vs the closed formula.
        for cfg in [
            NetworkConfig::desk(),
            cnn_ablation(&NetworkConfig::desk()),
            NetworkConfig::paper(500),
        ] {
            let p = Parameters::init(&cfg, 3);
            assert_eq!(p.element_count(), param_count(&cfg), "{:?}", cfg.arch);
        }
    }

    #[test]
    fn init_is_seed_deterministic() {
        let cfg = NetworkConfig::desk();
        assert_eq!(Parameters::init(&cfg, 7), Parameters::init(&cfg, 7));
        assert_ne!(Parameters::init(&cfg, 7), Parameters::init(&cfg, 8));
    }

    #[test]
    fn forget_gate_bias_starts_at_one() {
        let p = Parameters::init(&NetworkConfig::desk(), 1);
        let l = p.lstm.as_ref().unwrap();
        assert!(l.b_f.iter().all(|&b| b == 1.0));
        assert!(l.b_i.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn flat_round_trip() {
        let cfg = NetworkConfig::desk();
        let p = Parameters::init(&cfg, 5);
        let flat = p.to_flat();
        let mut q = Parameters::zeros_like(&cfg);
        q.assign_flat(&flat);
        q.input_mean = p.input_mean;
        q.input_std = p.input_std;
        assert_eq!(p, q);
    }
}
