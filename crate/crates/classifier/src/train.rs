//! SGD training loop with per-epoch history, and batched evaluation.

use ladderlab_dataset::Window;
use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::config::{NetworkConfig, TrainConfig};
use crate::net::{backward, forward, loss, sgd_step};
use crate::params::Parameters;
use crate::ClassifierError;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

pub type History = Vec<EpochStats>;

fn to_matrix(windows: &[&Window]) -> (Array2<f64>, Vec<usize>) {
    let w = windows[0].samples.len();
    let mut x = Array2::<f64>::zeros((windows.len(), w));
    let mut labels = Vec::with_capacity(windows.len());
    for (i, win) in windows.iter().enumerate() {
        for (j, &s) in win.samples.iter().enumerate() {
            x[(i, j)] = s as f64;
        }
        labels.push(win.label as usize);
    }
    (x, labels)
}

/// Forward/backward over a batch, split into fixed-size chunks evaluated in
/// parallel and reduced in chunk order so the result is independent of
/// scheduling. Returns (sum of gradients, summed loss, correct count);
/// gradients come back as per-sample means times chunk size, i.e. summed.
fn batch_gradients(
    params: &Parameters,
    x: &Array2<f64>,
    labels: &[usize],
    mask: Option<&Array2<f64>>,
) -> (Parameters, f64, usize) {
    const CHUNK: usize = 16;
    let n = x.nrows();
    let ranges: Vec<(usize, usize)> = (0..n)
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(n)))
        .collect();
    let parts: Vec<(Parameters, f64, usize)> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let xs = x.slice(ndarray::s![lo..hi, ..]).to_owned();
            let ls = &labels[lo..hi];
            let ms = mask.map(|m| m.slice(ndarray::s![lo..hi, ..]).to_owned());
            let cache = forward(params, &xs, ms);
            let batch_loss = loss(&cache.probs, ls);
            let correct = cache
                .probs
                .axis_iter(Axis(0))
                .zip(ls.iter())
                .filter(|(row, &label)| (row[1] > row[0]) == (label == 1))
                .count();
            let mut grads = backward(params, &cache, ls);
            // backward averages over its chunk; rescale to a plain sum.
            grads.scale((hi - lo) as f64);
            (grads, batch_loss * (hi - lo) as f64, correct)
        })
        .collect();

    let mut grads = Parameters::zeros_like(&params.cfg);
    let mut loss_sum = 0.0;
    let mut correct = 0;
    for (g, l, c) in parts {
        grads.add_assign(&g);
        loss_sum += l;
        correct += c;
    }
    (grads, loss_sum, correct)
}

/// Train on a labeled window set. The validation slice is carved off the end
/// of a seeded stratified shuffle; history records one entry per epoch.
/// Deterministic given the config seed.
pub fn train(
    windows: &[Window],
    net_cfg: &NetworkConfig,
    train_cfg: &TrainConfig,
) -> Result<(Parameters, History), ClassifierError> {
    if windows.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    net_cfg
        .validate()
        .map_err(ClassifierError::BadConfiguration)?;
    if windows.iter().any(|w| w.samples.len() != net_cfg.window) {
        return Err(ClassifierError::BadConfiguration(
            "window length differs from the network input size".into(),
        ));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(train_cfg.seed);
    let mut order: Vec<usize> = (0..windows.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((windows.len() as f64) * train_cfg.validation_split).round() as usize;
    let n_val = n_val.min(windows.len().saturating_sub(1));
    let (train_idx, val_idx) = order.split_at(windows.len() - n_val);
    let train_set: Vec<&Window> = train_idx.iter().map(|&i| &windows[i]).collect();
    let val_set: Vec<&Window> = val_idx.iter().map(|&i| &windows[i]).collect();

    let (x_train, y_train) = to_matrix(&train_set);
    let (x_val, y_val) = if val_set.is_empty() {
        (Array2::zeros((0, net_cfg.window)), Vec::new())
    } else {
        to_matrix(&val_set)
    };

    let mut params = Parameters::init(net_cfg, train_cfg.seed);
    // Standardize inputs with training-set statistics; the constants ship
    // with the model.
    let n_elems = (x_train.nrows() * x_train.ncols()) as f64;
    let mean = x_train.sum() / n_elems;
    let var = x_train.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_elems;
    params.input_mean = mean;
    params.input_std = var.sqrt().max(1e-6);

    let mut velocity = Parameters::zeros_like(net_cfg);
    let keep = 1.0 - net_cfg.dropout_rate;
    let n_train = x_train.nrows();
    let mut history = Vec::with_capacity(train_cfg.epochs);
    let mut batch_order: Vec<usize> = (0..n_train).collect();

    for _epoch in 0..train_cfg.epochs {
        batch_order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_correct = 0usize;
        for chunk in batch_order.chunks(train_cfg.batch_size) {
            let mut xb = Array2::<f64>::zeros((chunk.len(), net_cfg.window));
            let mut yb = Vec::with_capacity(chunk.len());
            for (row, &i) in chunk.iter().enumerate() {
                xb.row_mut(row).assign(&x_train.row(i));
                yb.push(y_train[i]);
            }
            let mask = if net_cfg.dropout_rate > 0.0 {
                let mut m = Array2::<f64>::zeros((chunk.len(), net_cfg.dense_input()));
                for v in m.iter_mut() {
                    if rng.gen::<f64>() < keep {
                        *v = 1.0 / keep;
                    }
                }
                Some(m)
            } else {
                None
            };
            let (mut grads, loss_sum, correct) =
                batch_gradients(&params, &xb, &yb, mask.as_ref());
            grads.scale(1.0 / chunk.len() as f64);
            epoch_loss += loss_sum;
            epoch_correct += correct;
            sgd_step(
                &mut params,
                &mut velocity,
                &grads,
                train_cfg.learning_rate,
                train_cfg.momentum,
            );
        }
        let (val_loss, val_accuracy) = if y_val.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            evaluate_matrix(&params, &x_val, &y_val)
        };
        history.push(EpochStats {
            train_loss: epoch_loss / n_train as f64,
            train_accuracy: epoch_correct as f64 / n_train as f64,
            val_loss,
            val_accuracy,
        });
    }

    Ok((params, history))
}

fn evaluate_matrix(params: &Parameters, x: &Array2<f64>, labels: &[usize]) -> (f64, f64) {
    const CHUNK: usize = 256;
    let n = x.nrows();
    let ranges: Vec<(usize, usize)> = (0..n)
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(n)))
        .collect();
    let parts: Vec<(f64, usize)> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let xs = x.slice(ndarray::s![lo..hi, ..]).to_owned();
            let cache = forward(params, &xs, None);
            let ls = &labels[lo..hi];
            let l = loss(&cache.probs, ls) * (hi - lo) as f64;
            let correct = cache
                .probs
                .axis_iter(Axis(0))
                .zip(ls.iter())
                .filter(|(row, &label)| (row[1] > row[0]) == (label == 1))
                .count();
            (l, correct)
        })
        .collect();
    let loss_sum: f64 = parts.iter().map(|p| p.0).sum();
    let correct: usize = parts.iter().map(|p| p.1).sum();
    (loss_sum / n as f64, correct as f64 / n as f64)
}

/// (accuracy, mean loss) over a labeled window set, inference mode.
pub fn evaluate(params: &Parameters, windows: &[Window]) -> Result<(f64, f64), ClassifierError> {
    if windows.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let refs: Vec<&Window> = windows.iter().collect();
    let (x, y) = to_matrix(&refs);
    let (loss, acc) = evaluate_matrix(params, &x, &y);
    Ok((acc, loss))
}

/// Class-1 ("short operation") probabilities for a batch of raw windows.
pub fn predict_probs(params: &Parameters, windows: &[Vec<f32>]) -> Vec<f32> {
    if windows.is_empty() {
        return Vec::new();
    }
    let w = windows[0].len();
    let mut x = Array2::<f64>::zeros((windows.len(), w));
    for (i, win) in windows.iter().enumerate() {
        for (j, &s) in win.iter().enumerate() {
            x[(i, j)] = s as f64;
        }
    }
    let cache = forward(params, &x, None);
    cache
        .probs
        .axis_iter(Axis(0))
        .map(|row| row[1] as f32)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Arch;

    fn toy_windows() -> Vec<Window> {
        // Linearly separable by construction: class 1 windows sit at a high
        // level, class 0 at a low one, with a deterministic ripple.
        let mut out = Vec::new();
        for i in 0..20 {
            let label = i % 2 == 0;
            let base = if label { 18.0 } else { 6.0 };
            let samples: Vec<f32> = (0..24)
                .map(|j| base + ((i * 7 + j) % 5) as f32 * 0.4)
                .collect();
            out.push(Window {
                samples,
                label,
                origin: 0,
                start: i as u64,
            });
        }
        out
    }

    fn toy_cfg() -> NetworkConfig {
        NetworkConfig {
            arch: Arch::Lstm,
            window: 24,
            conv_filters: 4,
            conv_kernel: 3,
            pool_size: 2,
            lstm_units: 8,
            dense_units: 8,
            dropout_rate: 0.0,
            classes: 2,
        }
    }

    #[test]
    fn separable_toy_set_reaches_full_training_accuracy() {
        let cfg = toy_cfg();
        let tc = TrainConfig {
            epochs: 50,
            batch_size: 4,
            validation_split: 0.2,
            learning_rate: 0.05,
            momentum: 0.9,
            seed: 5,
        };
        let (params, history) = train(&toy_windows(), &cfg, &tc).unwrap();
        let best = history
            .iter()
            .map(|e| e.train_accuracy)
            .fold(0.0f64, f64::max);
        assert!(best >= 1.0 - 1e-9, "best train accuracy {best}");
        let (acc, _) = evaluate(&params, &toy_windows()).unwrap();
        assert!(acc >= 0.95, "eval accuracy {acc}");
    }

    #[test]
    fn same_seed_reproduces_history_exactly() {
        let cfg = NetworkConfig {
            dropout_rate: 0.5,
            ..toy_cfg()
        };
        let tc = TrainConfig {
            epochs: 5,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let (_, h1) = train(&toy_windows(), &cfg, &tc).unwrap();
        let (_, h2) = train(&toy_windows(), &cfg, &tc).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let cfg = toy_cfg();
        assert!(matches!(
            train(&[], &cfg, &TrainConfig::default()),
            Err(ClassifierError::EmptyDataset)
        ));
        let params = Parameters::init(&cfg, 1);
        assert!(matches!(
            evaluate(&params, &[]),
            Err(ClassifierError::EmptyDataset)
        ));
    }
}
