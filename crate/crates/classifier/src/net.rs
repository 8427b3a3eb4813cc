//! Forward pass, loss, and backpropagation (through time for the LSTM).

use ndarray::{concatenate, s, Array2, Array3, Axis};

use crate::config::Arch;
use crate::params::Parameters;

pub const PROB_EPSILON: f64 = 1e-12;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct LstmStepCache {
    h_prev: Array2<f64>,
    c_prev: Array2<f64>,
    i: Array2<f64>,
    f: Array2<f64>,
    g: Array2<f64>,
    o: Array2<f64>,
    tanh_c: Array2<f64>,
}

pub struct ForwardCache {
    x: Array2<f64>,
    conv_pre: Array3<f64>,
    pooled: Array3<f64>,
    lstm_steps: Vec<LstmStepCache>,
    /// Multiplicative dropout mask (0 or 1/(1-rate)); identity at inference.
    dropout_mask: Option<Array2<f64>>,
    dense_in: Array2<f64>,
    dense_pre: Array2<f64>,
    dense_act: Array2<f64>,
    pub probs: Array2<f64>,
}

/// Forward pass over a batch of raw windows, rows = samples.
///
/// `dropout_mask`: None for inference. For training, a precomputed mask of
/// shape (batch, dense_input) whose entries are 0 (dropped) or 1/(1-rate).
pub fn forward(
    params: &Parameters,
    x_raw: &Array2<f64>,
    dropout_mask: Option<Array2<f64>>,
) -> ForwardCache {
    let cfg = &params.cfg;
    let batch = x_raw.nrows();
    debug_assert_eq!(x_raw.ncols(), cfg.window);
    let x = x_raw.mapv(|v| (v - params.input_mean) / params.input_std);

    // Valid 1-D convolution + ReLU.
    let t1 = cfg.window - cfg.conv_kernel + 1;
    let f = cfg.conv_filters;
    let mut conv_pre = Array3::<f64>::zeros((batch, t1, f));
    for b in 0..batch {
        let row = x.row(b);
        for t in 0..t1 {
            for j in 0..f {
                let mut acc = params.conv_b[j];
                for k in 0..cfg.conv_kernel {
                    acc += row[t + k] * params.conv_w[(k, j)];
                }
                conv_pre[(b, t, j)] = acc;
            }
        }
    }
    let conv_act = conv_pre.mapv(|v| v.max(0.0));

    // Non-overlapping average pooling, remainder truncated.
    let t = cfg.timesteps();
    let p = cfg.pool_size;
    let mut pooled = Array3::<f64>::zeros((batch, t, f));
    for b in 0..batch {
        for step in 0..t {
            for j in 0..f {
                let mut acc = 0.0;
                for q in 0..p {
                    acc += conv_act[(b, step * p + q, j)];
                }
                pooled[(b, step, j)] = acc / p as f64;
            }
        }
    }

    // Sequence model: LSTM final hidden state, or flattening for the CNN
    // ablation.
    let mut lstm_steps = Vec::new();
    let features: Array2<f64> = match cfg.arch {
        Arch::Lstm => {
            let lstm = params.lstm.as_ref().expect("lstm parameters");
            let u = cfg.lstm_units;
            let mut h = Array2::<f64>::zeros((batch, u));
            let mut c = Array2::<f64>::zeros((batch, u));
            for step in 0..t {
                let x_t = pooled.slice(s![.., step, ..]).to_owned();
                let concat = concatenate(Axis(1), &[x_t.view(), h.view()]).unwrap();
                let zi = concat.dot(&lstm.w_i.t()) + &lstm.b_i;
                let zf = concat.dot(&lstm.w_f.t()) + &lstm.b_f;
                let zg = concat.dot(&lstm.w_g.t()) + &lstm.b_g;
                let zo = concat.dot(&lstm.w_o.t()) + &lstm.b_o;
                let i_g = zi.mapv(sigmoid);
                let f_g = zf.mapv(sigmoid);
                let g_g = zg.mapv(f64::tanh);
                let o_g = zo.mapv(sigmoid);
                let c_new = &f_g * &c + &i_g * &g_g;
                let tanh_c = c_new.mapv(f64::tanh);
                let h_new = &o_g * &tanh_c;
                lstm_steps.push(LstmStepCache {
                    h_prev: h,
                    c_prev: c,
                    i: i_g,
                    f: f_g,
                    g: g_g,
                    o: o_g,
                    tanh_c,
                });
                h = h_new;
                c = c_new;
            }
            h
        }
        Arch::Cnn => {
            let mut flat = Array2::<f64>::zeros((batch, t * f));
            for b in 0..batch {
                for step in 0..t {
                    for j in 0..f {
                        flat[(b, step * f + j)] = pooled[(b, step, j)];
                    }
                }
            }
            flat
        }
    };

    let dense_in = match &dropout_mask {
        Some(mask) => &features * mask,
        None => features,
    };

    let dense_pre = dense_in.dot(&params.dense_w.t()) + &params.dense_b;
    let dense_act = dense_pre.mapv(|v| v.max(0.0));
    let logits = dense_act.dot(&params.out_w.t()) + &params.out_b;

    // Row-wise softmax, max-shifted for stability.
    let mut probs = logits;
    for mut row in probs.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }

    ForwardCache {
        x,
        conv_pre,
        pooled,
        lstm_steps,
        dropout_mask,
        dense_in,
        dense_pre,
        dense_act,
        probs,
    }
}

/// Mean binary cross-entropy over the batch: -log p(true class), clamped.
pub fn loss(probs: &Array2<f64>, labels: &[usize]) -> f64 {
    debug_assert_eq!(probs.nrows(), labels.len());
    let mut total = 0.0;
    for (b, &label) in labels.iter().enumerate() {
        total -= probs[(b, label)].max(PROB_EPSILON).ln();
    }
    total / labels.len() as f64
}

/// Gradients of the mean loss with respect to every parameter.
pub fn backward(params: &Parameters, cache: &ForwardCache, labels: &[usize]) -> Parameters {
    let cfg = &params.cfg;
    let batch = cache.x.nrows();
    let mut grad = Parameters::zeros_like(cfg);

    // d loss / d logits = (softmax - onehot) / batch.
    let mut dlogits = cache.probs.clone();
    for (b, &label) in labels.iter().enumerate() {
        dlogits[(b, label)] -= 1.0;
    }
    dlogits.mapv_inplace(|v| v / batch as f64);

    grad.out_w = dlogits.t().dot(&cache.dense_act);
    grad.out_b = dlogits.sum_axis(Axis(0));
    let d_dense_act = dlogits.dot(&params.out_w);

    let relu_mask = cache.dense_pre.mapv(|v| (v > 0.0) as u8 as f64);
    let d_dense_pre = &d_dense_act * &relu_mask;

    grad.dense_w = d_dense_pre.t().dot(&cache.dense_in);
    grad.dense_b = d_dense_pre.sum_axis(Axis(0));
    let d_dense_in = d_dense_pre.dot(&params.dense_w);

    let d_features = match &cache.dropout_mask {
        Some(mask) => &d_dense_in * mask,
        None => d_dense_in,
    };

    let t = cfg.timesteps();
    let f = cfg.conv_filters;
    let mut d_pooled = Array3::<f64>::zeros((batch, t, f));

    match cfg.arch {
        Arch::Lstm => {
            let lstm = params.lstm.as_ref().expect("lstm parameters");
            let glstm = grad.lstm.as_mut().expect("lstm gradients");
            let u = cfg.lstm_units;
            let mut dh = d_features;
            let mut dc_next = Array2::<f64>::zeros((batch, u));
            for step in (0..t).rev() {
                let sc = &cache.lstm_steps[step];
                let d_o = &dh * &sc.tanh_c;
                let dc = &dc_next + &(&dh * &sc.o * &sc.tanh_c.mapv(|v| 1.0 - v * v));
                let d_i = &dc * &sc.g;
                let d_g = &dc * &sc.i;
                let d_f = &dc * &sc.c_prev;
                dc_next = &dc * &sc.f;

                let dzi = &d_i * &sc.i * &sc.i.mapv(|v| 1.0 - v);
                let dzf = &d_f * &sc.f * &sc.f.mapv(|v| 1.0 - v);
                let dzg = &d_g * &sc.g.mapv(|v| 1.0 - v * v);
                let dzo = &d_o * &sc.o * &sc.o.mapv(|v| 1.0 - v);

                let x_t = cache.pooled.slice(s![.., step, ..]).to_owned();
                let concat = concatenate(Axis(1), &[x_t.view(), sc.h_prev.view()]).unwrap();

                glstm.w_i = &glstm.w_i + &dzi.t().dot(&concat);
                glstm.b_i = &glstm.b_i + &dzi.sum_axis(Axis(0));
                glstm.w_f = &glstm.w_f + &dzf.t().dot(&concat);
                glstm.b_f = &glstm.b_f + &dzf.sum_axis(Axis(0));
                glstm.w_g = &glstm.w_g + &dzg.t().dot(&concat);
                glstm.b_g = &glstm.b_g + &dzg.sum_axis(Axis(0));
                glstm.w_o = &glstm.w_o + &dzo.t().dot(&concat);
                glstm.b_o = &glstm.b_o + &dzo.sum_axis(Axis(0));

                let d_concat = dzi.dot(&lstm.w_i)
                    + dzf.dot(&lstm.w_f)
                    + dzg.dot(&lstm.w_g)
                    + dzo.dot(&lstm.w_o);
                d_pooled
                    .slice_mut(s![.., step, ..])
                    .assign(&d_concat.slice(s![.., ..f]));
                dh = d_concat.slice(s![.., f..]).to_owned();
            }
        }
        Arch::Cnn => {
            for b in 0..batch {
                for step in 0..t {
                    for j in 0..f {
                        d_pooled[(b, step, j)] = d_features[(b, step * f + j)];
                    }
                }
            }
        }
    }

    // Pool backward: spread evenly; truncated tail gets nothing.
    let t1 = cfg.window - cfg.conv_kernel + 1;
    let p = cfg.pool_size;
    let mut d_conv_act = Array3::<f64>::zeros((batch, t1, f));
    for b in 0..batch {
        for step in 0..t {
            for j in 0..f {
                let share = d_pooled[(b, step, j)] / p as f64;
                for q in 0..p {
                    d_conv_act[(b, step * p + q, j)] = share;
                }
            }
        }
    }

    // Conv ReLU + kernel gradients.
    for b in 0..batch {
        let row = cache.x.row(b);
        for t_pos in 0..t1 {
            for j in 0..f {
                if cache.conv_pre[(b, t_pos, j)] <= 0.0 {
                    continue;
                }
                let d = d_conv_act[(b, t_pos, j)];
                if d == 0.0 {
                    continue;
                }
                grad.conv_b[j] += d;
                for k in 0..cfg.conv_kernel {
                    grad.conv_w[(k, j)] += d * row[t_pos + k];
                }
            }
        }
    }

    grad
}

/// Velocity-based SGD: v <- momentum * v - lr * g; theta <- theta + v.
pub fn sgd_step(
    params: &mut Parameters,
    velocity: &mut Parameters,
    grads: &Parameters,
    lr: f64,
    momentum: f64,
) {
    velocity.zip_apply(grads, |v, g| momentum * v - lr * g);
    params.add_assign(velocity);
}
