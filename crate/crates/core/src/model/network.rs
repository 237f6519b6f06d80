//! Sequential network assembly, forward/backward dispatch, and the
//! ordered-layer view used by transfer freezing.

use rand_chacha::ChaCha8Rng;

use super::config::{HeadKind, ModelKind, ModelSpec};
use super::layers::{
    BatchNorm1d, Conv1d, Dropout, Flatten, LastStep, Linear, MaxPool1d, Mode, Param, Relu,
    Subsample,
};
use super::recurrent::{LstmLayer, RnnLayer};
use super::tensor::{Tensor2, Tensor3, Value};
use crate::{rng, Error, Result};

/// Salt for the head-only init stream, so a swapped head is reproducible
/// from (source model, seed) alone.
pub const HEAD_INIT_SALT: u64 = 0x4EAD;

#[derive(Debug, Clone)]
pub enum Layer {
    Conv(Conv1d),
    Pool(MaxPool1d),
    Bn(BatchNorm1d),
    Relu(Relu),
    Flatten(Flatten),
    Linear(Linear),
    Dropout(Dropout),
    Subsample(Subsample),
    Rnn(RnnLayer),
    Lstm(LstmLayer),
    LastStep(LastStep),
}

impl Layer {
    fn forward(&mut self, value: Value, mode: Mode, rng: &mut ChaCha8Rng) -> Result<Value> {
        Ok(match self {
            Layer::Conv(l) => Value::Seq(l.forward(&value.into_seq()?, mode)),
            Layer::Pool(l) => Value::Seq(l.forward(&value.into_seq()?, mode)),
            Layer::Bn(l) => Value::Seq(l.forward(&value.into_seq()?, mode)),
            Layer::Relu(l) => {
                let mut value = value;
                match &mut value {
                    Value::Seq(t) => l.forward_data(&mut t.data, mode),
                    Value::Flat(t) => l.forward_data(&mut t.data, mode),
                }
                value
            }
            Layer::Flatten(l) => Value::Flat(l.forward(value.into_seq()?, mode)),
            Layer::Linear(l) => Value::Flat(l.forward(&value.into_flat()?, mode)),
            Layer::Dropout(l) => {
                let mut value = value;
                match &mut value {
                    Value::Seq(t) => l.forward_data(&mut t.data, mode, rng),
                    Value::Flat(t) => l.forward_data(&mut t.data, mode, rng),
                }
                value
            }
            Layer::Subsample(l) => Value::Seq(l.forward(&value.into_seq()?, mode)),
            Layer::Rnn(l) => Value::Seq(l.forward(&value.into_seq()?, mode)),
            Layer::Lstm(l) => Value::Seq(l.forward(&value.into_seq()?, mode)),
            Layer::LastStep(l) => Value::Flat(l.forward(&value.into_seq()?, mode)),
        })
    }

    fn backward(&mut self, grad: Value) -> Result<Value> {
        Ok(match self {
            Layer::Conv(l) => Value::Seq(l.backward(&grad.into_seq()?)),
            Layer::Pool(l) => Value::Seq(l.backward(&grad.into_seq()?)),
            Layer::Bn(l) => Value::Seq(l.backward(&grad.into_seq()?)),
            Layer::Relu(l) => {
                let mut grad = grad;
                match &mut grad {
                    Value::Seq(t) => l.backward_data(&mut t.data),
                    Value::Flat(t) => l.backward_data(&mut t.data),
                }
                grad
            }
            Layer::Flatten(l) => Value::Seq(l.backward(grad.into_flat()?)),
            Layer::Linear(l) => Value::Flat(l.backward(&grad.into_flat()?)),
            Layer::Dropout(l) => {
                let mut grad = grad;
                match &mut grad {
                    Value::Seq(t) => l.backward_data(&mut t.data),
                    Value::Flat(t) => l.backward_data(&mut t.data),
                }
                grad
            }
            Layer::Subsample(l) => Value::Seq(l.backward(&grad.into_seq()?)),
            Layer::Rnn(l) => Value::Seq(l.backward(&grad.into_seq()?)),
            Layer::Lstm(l) => Value::Seq(l.backward(&grad.into_seq()?)),
            Layer::LastStep(l) => Value::Seq(l.backward(&grad.into_flat()?)),
        })
    }

    /// Parameter tensors of this layer, in a fixed order. Empty for
    /// activation/pool/dropout layers, which own no parameters.
    fn params(&self) -> Vec<&Param> {
        match self {
            Layer::Conv(l) => vec![&l.weight, &l.bias],
            Layer::Bn(l) => vec![&l.gamma, &l.beta],
            Layer::Linear(l) => vec![&l.weight, &l.bias],
            Layer::Rnn(l) => vec![&l.wx, &l.wh, &l.bias],
            Layer::Lstm(l) => vec![&l.wx, &l.wh, &l.bias],
            _ => Vec::new(),
        }
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        match self {
            Layer::Conv(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Bn(l) => vec![&mut l.gamma, &mut l.beta],
            Layer::Linear(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Rnn(l) => vec![&mut l.wx, &mut l.wh, &mut l.bias],
            Layer::Lstm(l) => vec![&mut l.wx, &mut l.wh, &mut l.bias],
            _ => Vec::new(),
        }
    }

    fn is_leaf(&self) -> bool {
        !self.params().is_empty()
    }

    fn trainable(&self) -> bool {
        match self {
            Layer::Conv(l) => l.trainable,
            Layer::Bn(l) => l.trainable,
            Layer::Linear(l) => l.trainable,
            Layer::Rnn(l) => l.trainable,
            Layer::Lstm(l) => l.trainable,
            _ => true,
        }
    }

    fn set_trainable(&mut self, trainable: bool) {
        match self {
            Layer::Conv(l) => l.trainable = trainable,
            Layer::Bn(l) => l.trainable = trainable,
            Layer::Linear(l) => l.trainable = trainable,
            Layer::Rnn(l) => l.trainable = trainable,
            Layer::Lstm(l) => l.trainable = trainable,
            _ => {}
        }
    }

    /// Non-parameter state that must survive save/load (batch-norm running
    /// statistics).
    fn state_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Layer::Bn(l) => vec![&mut l.running_mean, &mut l.running_var],
            _ => Vec::new(),
        }
    }

    fn state(&self) -> Vec<&Vec<f64>> {
        match self {
            Layer::Bn(l) => vec![&l.running_mean, &l.running_var],
            _ => Vec::new(),
        }
    }
}

/// One row of the ordered-layer view: every leaf layer that owns parameters,
/// in forward order. Activation, pooling, and dropout layers are excluded
/// from the indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerInfo {
    pub layer_index: usize,
    pub name: String,
    pub parameter_count: usize,
    pub trainable: bool,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub spec: ModelSpec,
    layers: Vec<(String, Layer)>,
}

impl Network {
    /// Build a network from its spec with deterministic initialization.
    pub fn build(spec: &ModelSpec, init_seed: u64) -> Result<Network> {
        let mut rng = rng::seeded(rng::mix(init_seed, 0x1417));
        let mut layers: Vec<(String, Layer)> = Vec::new();
        match spec {
            ModelSpec::Cnn { backbone, head } => {
                backbone.validate()?;
                let flatten_dim = backbone.flatten_dim()?;
                for (i, b) in backbone.blocks.iter().enumerate() {
                    let p = format!("block{}", i + 1);
                    layers.push((
                        format!("{p}.conv1"),
                        Layer::Conv(Conv1d::new(&mut rng, b.in_channels, b.mid_channels, b.conv_kernel)),
                    ));
                    layers.push((format!("{p}.pool"), Layer::Pool(MaxPool1d::new(b.pool_size))));
                    layers.push((
                        format!("{p}.conv2"),
                        Layer::Conv(Conv1d::new(&mut rng, b.mid_channels, b.out_channels, b.conv_kernel)),
                    ));
                    layers.push((format!("{p}.bn"), Layer::Bn(BatchNorm1d::new(b.out_channels))));
                    layers.push((format!("{p}.relu"), Layer::Relu(Relu::new())));
                }
                let last_out = backbone.blocks.last().unwrap().out_channels;
                layers.push((
                    "tail.conv".into(),
                    Layer::Conv(Conv1d::new(&mut rng, last_out, backbone.tail_channels, backbone.tail_kernel)),
                ));
                layers.push(("tail.bn".into(), Layer::Bn(BatchNorm1d::new(backbone.tail_channels))));
                layers.push(("tail.relu".into(), Layer::Relu(Relu::new())));
                layers.push(("flatten".into(), Layer::Flatten(Flatten::new())));
                let mut width = flatten_dim;
                for (i, &w) in backbone.mlp.iter().enumerate() {
                    layers.push((
                        format!("mlp.fc{}", i + 1),
                        Layer::Linear(Linear::new(&mut rng, width, w)),
                    ));
                    layers.push((format!("mlp.relu{}", i + 1), Layer::Relu(Relu::new())));
                    layers.push((
                        format!("mlp.dropout{}", i + 1),
                        Layer::Dropout(Dropout::new(backbone.dropout)),
                    ));
                    width = w;
                }
                layers.push((
                    "head".into(),
                    Layer::Linear(Linear::new(&mut rng, width, head.output_dim())),
                ));
            }
            ModelSpec::Recurrent { kind, config, head } => {
                if config.hidden == 0 || config.layers == 0 {
                    return Err(Error::ConfigInvalid(
                        "recurrent models need hidden > 0 and layers > 0".into(),
                    ));
                }
                if config.stride > 1 {
                    layers.push(("stride".into(), Layer::Subsample(Subsample::new(config.stride))));
                }
                let mut in_f = config.input_features;
                for i in 0..config.layers {
                    let name = format!("{}{}", kind.as_str(), i + 1);
                    let layer = match kind {
                        ModelKind::Rnn => Layer::Rnn(RnnLayer::new(&mut rng, in_f, config.hidden)),
                        ModelKind::Lstm => Layer::Lstm(LstmLayer::new(&mut rng, in_f, config.hidden)),
                        ModelKind::OneDCnn => unreachable!("cnn handled above"),
                    };
                    layers.push((name, layer));
                    in_f = config.hidden;
                }
                layers.push(("last".into(), Layer::LastStep(LastStep::new())));
                layers.push((
                    "head".into(),
                    Layer::Linear(Linear::new(&mut rng, config.hidden, head.output_dim())),
                ));
            }
        }
        Ok(Network {
            spec: spec.clone(),
            layers,
        })
    }

    pub fn output_dim(&self) -> usize {
        self.spec.head().output_dim()
    }

    /// Forward pass. Train mode caches gradient-ready activations; eval mode
    /// uses running normalization statistics and disables dropout.
    pub fn forward(&mut self, x: &Tensor3, mode: Mode, rng: &mut ChaCha8Rng) -> Result<Tensor2> {
        let (channels, len) = self.spec.input_shape();
        if x.channels != channels || x.len != len {
            return Err(Error::ShapeMismatch(format!(
                "input is [{} x {} x {}], model expects [batch x {channels} x {len}]",
                x.batch, x.channels, x.len
            )));
        }
        if x.batch == 0 {
            return Err(Error::ShapeMismatch("empty batch".into()));
        }
        let mut value = Value::Seq(x.clone());
        for (_, layer) in self.layers.iter_mut() {
            value = layer.forward(value, mode, rng)?;
        }
        value.into_flat()
    }

    /// Backward pass from the loss gradient w.r.t. the logits. Accumulates
    /// parameter gradients on trainable layers.
    pub fn backward(&mut self, grad_logits: Tensor2) -> Result<()> {
        let mut grad = Value::Flat(grad_logits);
        for (_, layer) in self.layers.iter_mut().rev() {
            grad = layer.backward(grad)?;
        }
        Ok(())
    }

    pub fn zero_grads(&mut self) {
        for (_, layer) in self.layers.iter_mut() {
            for p in layer.params_mut() {
                p.zero_grad();
            }
        }
    }

    /// The ordered-layer view: leaf layers owning parameters, forward order.
    pub fn enumerate_layers(&self) -> Vec<LayerInfo> {
        self.layers
            .iter()
            .filter(|(_, l)| l.is_leaf())
            .enumerate()
            .map(|(i, (name, l))| LayerInfo {
                layer_index: i,
                name: name.clone(),
                parameter_count: l.params().iter().map(|p| p.data.len()).sum(),
                trainable: l.trainable(),
            })
            .collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.layers.iter().filter(|(_, l)| l.is_leaf()).count()
    }

    pub fn total_params(&self) -> usize {
        self.enumerate_layers()
            .iter()
            .map(|i| i.parameter_count)
            .sum()
    }

    pub fn set_leaf_trainable(&mut self, leaf_index: usize, trainable: bool) -> Result<()> {
        let mut seen = 0;
        for (_, layer) in self.layers.iter_mut() {
            if layer.is_leaf() {
                if seen == leaf_index {
                    layer.set_trainable(trainable);
                    return Ok(());
                }
                seen += 1;
            }
        }
        Err(Error::IndexOutOfRange {
            index: leaf_index,
            len: seen,
        })
    }

    /// Parameter tensors in leaf walk order, paired with the owning leaf's
    /// trainable flag. This is the optimizer's and checkpoint's view.
    pub fn param_tensors_mut(&mut self) -> Vec<(&mut Param, bool)> {
        let mut out = Vec::new();
        for (_, layer) in self.layers.iter_mut() {
            let trainable = layer.trainable();
            for p in layer.params_mut() {
                out.push((p, trainable));
            }
        }
        out
    }

    pub fn param_tensors(&self) -> Vec<&Param> {
        self.layers
            .iter()
            .flat_map(|(_, l)| l.params())
            .collect()
    }

    /// For each leaf layer (in enumeration order), the `[start, end)` range
    /// of its tensors within the flat parameter walk.
    pub fn leaf_param_ranges(&self) -> Vec<(usize, usize)> {
        let mut ranges = Vec::new();
        let mut start = 0;
        for (_, layer) in &self.layers {
            let count = layer.params().len();
            if count > 0 {
                ranges.push((start, start + count));
                start += count;
            }
        }
        ranges
    }

    /// Named parameter tensors, for gradient checking.
    pub fn named_params_mut(&mut self) -> Vec<(String, &mut Param)> {
        let mut out = Vec::new();
        for (name, layer) in self.layers.iter_mut() {
            for (i, p) in layer.params_mut().into_iter().enumerate() {
                out.push((format!("{name}#{i}"), p));
            }
        }
        out
    }

    /// Non-parameter state tensors (running statistics), in walk order.
    pub fn state_tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers
            .iter_mut()
            .flat_map(|(_, l)| l.state_mut())
            .collect()
    }

    pub fn state_tensors(&self) -> Vec<&Vec<f64>> {
        self.layers.iter().flat_map(|(_, l)| l.state()).collect()
    }

    /// Bit-exact equality of learnable parameters (not running statistics).
    pub fn params_equal(&self, other: &Network) -> bool {
        let a = self.param_tensors();
        let b = other.param_tensors();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.data == y.data)
    }

    /// Replace the final layer (the head) with a freshly initialized linear
    /// layer of the given output width. Everything else is left untouched.
    pub fn replace_head(&mut self, head: HeadKind, seed: u64) -> Result<()> {
        let (name, last) = self
            .layers
            .last_mut()
            .ok_or_else(|| Error::IncompatibleArchitecture("empty network".into()))?;
        let Layer::Linear(old) = last else {
            return Err(Error::IncompatibleArchitecture(format!(
                "final layer {name} is not linear"
            )));
        };
        let mut rng = rng::seeded(rng::mix(seed, HEAD_INIT_SALT));
        *old = Linear::new(&mut rng, old.in_features, head.output_dim());
        self.spec = self.spec.with_head(head);
        Ok(())
    }

    /// Layer table: index, name, parameter count, trainable flag.
    pub fn summary(&self) -> String {
        let mut out = String::from("index  name            params  trainable\n");
        for info in self.enumerate_layers() {
            out.push_str(&format!(
                "{:<5}  {:<14}  {:<6}  {}\n",
                info.layer_index, info.name, info.parameter_count, info.trainable
            ));
        }
        out.push_str(&format!("total parameters: {}\n", self.total_params()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::{default_backbone, default_recurrent, BackboneConfig, BlockConfig};

    pub(crate) fn tiny_backbone() -> BackboneConfig {
        BackboneConfig {
            input_channels: 2,
            input_len: 32,
            blocks: vec![BlockConfig {
                in_channels: 2,
                mid_channels: 3,
                out_channels: 4,
                conv_kernel: 3,
                pool_size: 2,
            }],
            tail_channels: 4,
            tail_kernel: 3,
            mlp: vec![8],
            dropout: 0.0,
        }
    }

    fn input(batch: usize, ch: usize, len: usize) -> Tensor3 {
        let mut x = Tensor3::zeros(batch, ch, len);
        for (i, v) in x.data.iter_mut().enumerate() {
            *v = ((i * 37 + 11) % 101) as f64 / 101.0;
        }
        x
    }

    #[test]
    fn default_enumeration_is_pinned() {
        let spec = ModelSpec::Cnn {
            backbone: default_backbone(),
            head: HeadKind::Classification(5),
        };
        let net = Network::build(&spec, 0).unwrap();
        let names: Vec<String> = net.enumerate_layers().into_iter().map(|i| i.name).collect();
        assert_eq!(
            names,
            vec![
                "block1.conv1",
                "block1.conv2",
                "block1.bn",
                "block2.conv1",
                "block2.conv2",
                "block2.bn",
                "block3.conv1",
                "block3.conv2",
                "block3.bn",
                "tail.conv",
                "tail.bn",
                "mlp.fc1",
                "mlp.fc2",
                "head",
            ]
        );
        assert!(net.enumerate_layers().iter().all(|i| i.trainable));
    }

    #[test]
    fn block_parameter_count_formula() {
        let spec = ModelSpec::Cnn {
            backbone: default_backbone(),
            head: HeadKind::Classification(5),
        };
        let net = Network::build(&spec, 0).unwrap();
        let infos = net.enumerate_layers();
        let b = &default_backbone().blocks[0];
        let conv1 = b.in_channels * b.mid_channels * b.conv_kernel + b.mid_channels;
        let conv2 = b.mid_channels * b.out_channels * b.conv_kernel + b.out_channels;
        let bn = 2 * b.out_channels;
        assert_eq!(infos[0].parameter_count, conv1);
        assert_eq!(infos[1].parameter_count, conv2);
        assert_eq!(infos[2].parameter_count, bn);
        let total: usize = infos.iter().map(|i| i.parameter_count).sum();
        assert_eq!(total, net.total_params());
    }

    #[test]
    fn forward_shapes_for_both_heads() {
        let backbone = default_backbone();
        let mut rng = crate::rng::seeded(0);
        let x = input(3, 8, 5000);

        let mut clf = Network::build(
            &ModelSpec::Cnn {
                backbone: backbone.clone(),
                head: HeadKind::Classification(5),
            },
            7,
        )
        .unwrap();
        let out = clf.forward(&x, Mode::Eval, &mut rng).unwrap();
        assert_eq!((out.rows, out.cols), (3, 5));

        let mut reg = Network::build(
            &ModelSpec::Cnn {
                backbone,
                head: HeadKind::Regression,
            },
            7,
        )
        .unwrap();
        let out = reg.forward(&x, Mode::Eval, &mut rng).unwrap();
        assert_eq!((out.rows, out.cols), (3, 1));
    }

    #[test]
    fn wrong_input_shape_is_rejected() {
        let spec = ModelSpec::Cnn {
            backbone: default_backbone(),
            head: HeadKind::Classification(5),
        };
        let mut net = Network::build(&spec, 0).unwrap();
        let mut rng = crate::rng::seeded(0);
        let x = input(2, 12, 5000);
        assert!(matches!(
            net.forward(&x, Mode::Eval, &mut rng),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn same_seed_builds_identical_params() {
        let spec = ModelSpec::Cnn {
            backbone: tiny_backbone(),
            head: HeadKind::Classification(3),
        };
        let a = Network::build(&spec, 42).unwrap();
        let b = Network::build(&spec, 42).unwrap();
        assert!(a.params_equal(&b));
        let c = Network::build(&spec, 43).unwrap();
        assert!(!a.params_equal(&c));
    }

    #[test]
    fn zero_input_gives_uniform_logits() {
        // zero biases + zero input -> zero logits in both modes
        let spec = ModelSpec::Cnn {
            backbone: default_backbone(),
            head: HeadKind::Classification(5),
        };
        let mut net = Network::build(&spec, 11).unwrap();
        let mut rng = crate::rng::seeded(0);
        let x = Tensor3::zeros(2, 8, 5000);
        for mode in [Mode::Eval, Mode::Train] {
            let out = net.forward(&x, mode, &mut rng).unwrap();
            for r in 0..out.rows {
                for &v in out.row(r) {
                    assert_eq!(v, 0.0);
                }
                let probs = crate::model::softmax(out.row(r));
                for p in probs {
                    assert!((p - 0.2).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eval_forward_is_batch_invariant() {
        let spec = ModelSpec::Cnn {
            backbone: tiny_backbone(),
            head: HeadKind::Classification(3),
        };
        let mut net = Network::build(&spec, 3).unwrap();
        let mut rng = crate::rng::seeded(0);
        let big = input(32, 2, 32);
        let batch_out = net.forward(&big, Mode::Eval, &mut rng).unwrap();
        for b in [0usize, 13, 31] {
            let mut single = Tensor3::zeros(1, 2, 32);
            for c in 0..2 {
                single.row_mut(0, c).copy_from_slice(big.row(b, c));
            }
            let one = net.forward(&single, Mode::Eval, &mut rng).unwrap();
            for (x, y) in one.row(0).iter().zip(batch_out.row(b)) {
                assert!((x - y).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn eval_forward_is_pure() {
        let spec = ModelSpec::Recurrent {
            kind: ModelKind::Rnn,
            config: super::super::config::RecurrentConfig {
                input_len: 32,
                input_features: 2,
                hidden: 4,
                layers: 2,
                stride: 4,
            },
            head: HeadKind::Regression,
        };
        let mut net = Network::build(&spec, 5).unwrap();
        let mut rng = crate::rng::seeded(0);
        let x = input(2, 2, 32);
        let a = net.forward(&x, Mode::Eval, &mut rng).unwrap();
        let b = net.forward(&x, Mode::Eval, &mut rng).unwrap();
        assert_eq!(a.data, b.data);
    }

    #[test]
    fn replace_head_keeps_backbone_and_is_seeded() {
        let spec = ModelSpec::Cnn {
            backbone: tiny_backbone(),
            head: HeadKind::Regression,
        };
        let net = Network::build(&spec, 9).unwrap();
        let mut a = net.clone();
        a.replace_head(HeadKind::Classification(5), 21).unwrap();
        let mut b = net.clone();
        b.replace_head(HeadKind::Classification(5), 21).unwrap();
        // heads identical across the two swaps
        assert!(a.params_equal(&b));
        // backbone tensors untouched (all but the last leaf)
        let before = net.param_tensors();
        let after = a.param_tensors();
        assert_eq!(before.len(), after.len());
        for (x, y) in before.iter().zip(&after).take(before.len() - 2) {
            assert_eq!(x.data, y.data);
        }
        assert_eq!(a.output_dim(), 5);
    }

    #[test]
    fn recurrent_models_honor_the_head_contract() {
        for kind in [ModelKind::Rnn, ModelKind::Lstm] {
            let spec = ModelSpec::Recurrent {
                kind,
                config: super::super::config::RecurrentConfig {
                    input_features: 2,
                    input_len: 32,
                    hidden: 6,
                    layers: 3,
                    stride: 2,
                },
                head: HeadKind::Classification(5),
            };
            let mut net = Network::build(&spec, 1).unwrap();
            let mut rng = crate::rng::seeded(0);
            let out = net.forward(&input(4, 2, 32), Mode::Eval, &mut rng).unwrap();
            assert_eq!((out.rows, out.cols), (4, 5));
            // leaf view: 3 recurrent cells + head
            assert_eq!(net.leaf_count(), 4);
        }
    }

    #[test]
    fn recurrent_configs_use_default_sizes() {
        let r = default_recurrent();
        assert_eq!((r.hidden, r.layers, r.stride), (128, 3, 10));
    }
}
