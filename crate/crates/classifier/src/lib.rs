//! Binary window classifier built from scratch: 1-D convolution, average
//! pooling, an LSTM (or its CNN ablation), dropout, a dense layer, and a
//! softmax head, trained with momentum SGD on binary cross-entropy.

mod config;
mod model_io;
mod net;
mod params;
mod train;

pub use config::{
    cnn_ablation, param_breakdown, param_count, Arch, NetworkConfig, ParamBreakdown, TrainConfig,
};
pub use model_io::{load_model, save_model, ModelHeader};
pub use net::{backward, forward, loss, sgd_step, ForwardCache, PROB_EPSILON};
pub use params::{LstmParams, Parameters};
pub use train::{evaluate, predict_probs, train, EpochStats, History};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("bad configuration: {0}")]
    BadConfiguration(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
