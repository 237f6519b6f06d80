//! The 1D-CNN (blocks of Conv -> MaxPool -> Conv -> BatchNorm -> ReLU, a
//! tail conv stage, and an MLP head) plus RNN and LSTM baselines, all behind
//! a small registry. Layer enumeration follows forward order over
//! parameter-owning leaves only, which is the indexing transfer freezing
//! relies on.

pub mod config;
pub mod layers;
pub mod recurrent;
pub mod tensor;

mod network;

pub use config::{
    default_backbone, default_recurrent, BackboneConfig, BlockConfig, HeadKind, ModelKind,
    ModelSpec, RecurrentConfig,
};
pub use layers::{Mode, Param};
pub use network::{Layer, LayerInfo, Network, HEAD_INIT_SALT};

use crate::Result;
use tensor::Tensor2;

/// Build the 1D-CNN with the given backbone and head.
pub fn build_1dcnn(backbone: &BackboneConfig, head: HeadKind, init_seed: u64) -> Result<Network> {
    Network::build(
        &ModelSpec::Cnn {
            backbone: backbone.clone(),
            head,
        },
        init_seed,
    )
}

/// Model registry: `1dcnn`, `rnn`, and `lstm` with their default
/// configurations. Anything else is an [`crate::Error::UnknownModel`].
pub fn registry_build(name: &str, head: HeadKind, init_seed: u64) -> Result<Network> {
    let spec = match name {
        "1dcnn" => ModelSpec::Cnn {
            backbone: default_backbone(),
            head,
        },
        "rnn" => ModelSpec::Recurrent {
            kind: ModelKind::Rnn,
            config: default_recurrent(),
            head,
        },
        "lstm" => ModelSpec::Recurrent {
            kind: ModelKind::Lstm,
            config: default_recurrent(),
            head,
        },
        other => return Err(crate::Error::UnknownModel(other.to_string())),
    };
    Network::build(&spec, init_seed)
}

/// Numerically stable softmax: exponentials are taken after subtracting the
/// row maximum, so the result is shift-invariant and overflow-free.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

/// Row-wise softmax over a logit matrix.
pub fn softmax_rows(logits: &Tensor2) -> Tensor2 {
    let mut out = Tensor2::zeros(logits.rows, logits.cols);
    for r in 0..logits.rows {
        out.row_mut(r).copy_from_slice(&softmax(logits.row(r)));
    }
    out
}
