//! Network and training configuration, and the trainable-parameter census.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    /// conv -> avg pool -> LSTM -> dropout -> dense -> softmax
    Lstm,
    /// Ablation: the LSTM is removed and the pooled feature map is flattened
    /// straight into the dense layer. All retained layers keep their sizes.
    Cnn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub arch: Arch,
    pub window: usize,
    pub conv_filters: usize,
    pub conv_kernel: usize,
    pub pool_size: usize,
    pub lstm_units: usize,
    pub dense_units: usize,
    pub dropout_rate: f64,
    pub classes: usize,
}

impl NetworkConfig {
    /// The full-scale configuration: 64 feature maps with kernel 3, pooling
    /// size 10, 1000 LSTM units, 1000 dense units, dropout 0.5, 2 classes.
    pub fn paper(window: usize) -> Self {
        NetworkConfig {
            arch: Arch::Lstm,
            window,
            conv_filters: 64,
            conv_kernel: 3,
            pool_size: 10,
            lstm_units: 1000,
            dense_units: 1000,
            dropout_rate: 0.5,
            classes: 2,
        }
    }

    /// Desk-scale configuration that trains in minutes on a CPU.
    pub fn desk() -> Self {
        NetworkConfig {
            arch: Arch::Lstm,
            window: 100,
            conv_filters: 16,
            conv_kernel: 3,
            pool_size: 10,
            lstm_units: 64,
            dense_units: 64,
            dropout_rate: 0.5,
            classes: 2,
        }
    }

    /// Timesteps after valid convolution and truncating average pooling.
    pub fn timesteps(&self) -> usize {
        (self.window - self.conv_kernel + 1) / self.pool_size
    }

    /// Width of the dense layer's input.
    pub fn dense_input(&self) -> usize {
        match self.arch {
            Arch::Lstm => self.lstm_units,
            Arch::Cnn => self.timesteps() * self.conv_filters,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.window < self.conv_kernel {
            return Err("window shorter than the convolution kernel".into());
        }
        if self.timesteps() == 0 {
            return Err("pooled sequence length is zero".into());
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err("dropout rate must be in [0, 1)".into());
        }
        if self.conv_filters == 0
            || self.conv_kernel == 0
            || self.pool_size == 0
            || self.lstm_units == 0
            || self.dense_units == 0
            || self.classes < 2
        {
            return Err("all layer sizes must be positive".into());
        }
        Ok(())
    }
}

/// Per-layer trainable parameter counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamBreakdown {
    pub conv: u64,
    pub lstm: u64,
    pub dense: u64,
    pub output: u64,
}

impl ParamBreakdown {
    pub fn total(&self) -> u64 {
        self.conv + self.lstm + self.dense + self.output
    }
}

pub fn param_breakdown(cfg: &NetworkConfig) -> ParamBreakdown {
    let (f, k, u, d, c) = (
        cfg.conv_filters as u64,
        cfg.conv_kernel as u64,
        cfg.lstm_units as u64,
        cfg.dense_units as u64,
        cfg.classes as u64,
    );
    let conv = k * f + f;
    let lstm = match cfg.arch {
        Arch::Lstm => 4 * (u * (f + u) + u),
        Arch::Cnn => 0,
    };
    let dense = cfg.dense_input() as u64 * d + d;
    let output = d * c + c;
    ParamBreakdown {
        conv,
        lstm,
        dense,
        output,
    }
}

pub fn param_count(cfg: &NetworkConfig) -> u64 {
    param_breakdown(cfg).total()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub validation_split: f64,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 64,
            validation_split: 0.2,
            learning_rate: 0.01,
            momentum: 0.9,
            seed: 1,
        }
    }
}

/// The ablation keeps every retained layer's size and drops the LSTM.
pub fn cnn_ablation(cfg: &NetworkConfig) -> NetworkConfig {
    NetworkConfig {
        arch: Arch::Cnn,
        ..cfg.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_configuration_parameter_census() {
        let cfg = NetworkConfig::paper(500);
        let b = param_breakdown(&cfg);
        assert_eq!(b.conv, 256);
        assert_eq!(b.lstm, 4_260_000);
        assert_eq!(b.dense, 1_001_000);
        assert_eq!(b.output, 2_002);
        assert_eq!(b.total(), 5_263_258);
        assert_eq!(param_count(&cfg), 5_263_258);
    }

    #[test]
    fn minimal_conv_counts_two() {
        let cfg = NetworkConfig {
            arch: Arch::Lstm,
            window: 4,
            conv_filters: 1,
            conv_kernel: 1,
            pool_size: 1,
            lstm_units: 1,
            dense_units: 1,
            dropout_rate: 0.0,
            classes: 2,
        };
        assert_eq!(param_breakdown(&cfg).conv, 2);
    }

    #[test]
    fn ablation_changes_only_lstm_and_dense_input() {
        let cfg = NetworkConfig::desk();
        let cnn = cnn_ablation(&cfg);
        let b = param_breakdown(&cfg);
        let bc = param_breakdown(&cnn);
        assert_eq!(bc.lstm, 0);
        assert_eq!(b.conv, bc.conv);
        assert_eq!(b.output, bc.output);
        assert_eq!(
            bc.dense,
            (cnn.timesteps() * cnn.conv_filters * cnn.dense_units + cnn.dense_units) as u64
        );
    }
}
