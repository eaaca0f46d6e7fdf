//! Siamese sentence-pair classifiers: a shared SRN, GRU, LSTM or summing
//! encoder, a comparison layer and a softmax over the seven relations.

use std::path::{Path, PathBuf};

pub mod checkpoint;
pub mod gradcheck;
pub mod model;
pub mod optim;
pub mod pretrained;
pub mod train;

pub use model::{Model, ModelConfig, ModelKind, Vocab};
pub use optim::{AdaDelta, AdaDeltaConfig};
pub use train::{evaluate, Confusion, EpochMetrics, Example, TrainConfig, Trainer};

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("words without an embedding: {}", .0.join(", "))]
    UnknownWords(Vec<String>),
    #[error("{what}: expected shape {expected:?}, found {found:?}")]
    Shape { what: &'static str, expected: (usize, usize), found: (usize, usize) },
    #[error("non-finite value {value} in {tensor} at flat index {index}")]
    NonFinite { tensor: &'static str, index: usize, value: f64 },
    #[error("only frozen pretrained embedding tables can take new words")]
    NotPretrained,
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl NetError {
    pub fn io(path: &Path, source: std::io::Error) -> NetError {
        NetError::Io { path: path.to_path_buf(), source }
    }
}
