//! Declarative model descriptions. A [`ModelSpec`] is everything needed to
//! rebuild a network skeleton: it renders to (and parses from) the flat
//! key-value config format, and checkpoints embed it.

use crate::config::KvConfig;
use crate::dataset::CLASS_COUNT;
use crate::signal::{LEAD_COUNT, SAMPLES_PER_LEAD};
use crate::{Error, Result};

/// Output head: a single scalar for regression, `classes` logits (softmax at
/// inference) for classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadKind {
    Regression,
    Classification(usize),
}

impl HeadKind {
    pub fn output_dim(self) -> usize {
        match self {
            HeadKind::Regression => 1,
            HeadKind::Classification(c) => c,
        }
    }
}

/// One convolutional block: Conv -> MaxPool -> Conv -> BatchNorm -> ReLU.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockConfig {
    pub in_channels: usize,
    pub mid_channels: usize,
    pub out_channels: usize,
    pub conv_kernel: usize,
    pub pool_size: usize,
}

/// Convolutional backbone plus MLP widths.
#[derive(Debug, Clone, PartialEq)]
pub struct BackboneConfig {
    pub input_channels: usize,
    pub input_len: usize,
    pub blocks: Vec<BlockConfig>,
    pub tail_channels: usize,
    pub tail_kernel: usize,
    pub mlp: Vec<usize>,
    pub dropout: f64,
}

impl BackboneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::ConfigInvalid("backbone needs at least one block".into()));
        }
        let mut in_ch = self.input_channels;
        for (i, b) in self.blocks.iter().enumerate() {
            if b.in_channels != in_ch {
                return Err(Error::ConfigInvalid(format!(
                    "block {} expects {} input channels, previous stage provides {in_ch}",
                    i + 1,
                    b.in_channels
                )));
            }
            if b.conv_kernel % 2 == 0 || b.conv_kernel == 0 {
                return Err(Error::ConfigInvalid(format!(
                    "block {} kernel must be odd, got {}",
                    i + 1,
                    b.conv_kernel
                )));
            }
            if b.pool_size == 0 || b.mid_channels == 0 || b.out_channels == 0 {
                return Err(Error::ConfigInvalid(format!("block {} has a zero size", i + 1)));
            }
            in_ch = b.out_channels;
        }
        if self.tail_kernel == 0 || self.tail_kernel.is_multiple_of(2) {
            return Err(Error::ConfigInvalid("tail kernel must be odd".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::ConfigInvalid(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }

    /// Sequence length after all pooling stages.
    pub fn final_len(&self) -> Result<usize> {
        let mut len = self.input_len;
        for (i, b) in self.blocks.iter().enumerate() {
            len /= b.pool_size;
            if len == 0 {
                return Err(Error::ShapeInference(format!(
                    "pooling collapses the sequence to length 0 at block {}",
                    i + 1
                )));
            }
        }
        Ok(len)
    }

    /// Flattened feature width entering the MLP.
    pub fn flatten_dim(&self) -> Result<usize> {
        Ok(self.tail_channels * self.final_len()?)
    }
}

/// Recurrent baseline description. The sequence may be strided for speed.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentConfig {
    pub input_features: usize,
    pub input_len: usize,
    pub hidden: usize,
    pub layers: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    OneDCnn,
    Rnn,
    Lstm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::OneDCnn => "1dcnn",
            ModelKind::Rnn => "rnn",
            ModelKind::Lstm => "lstm",
        }
    }
}

/// Complete network description.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Cnn {
        backbone: BackboneConfig,
        head: HeadKind,
    },
    Recurrent {
        kind: ModelKind,
        config: RecurrentConfig,
        head: HeadKind,
    },
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Cnn { .. } => ModelKind::OneDCnn,
            ModelSpec::Recurrent { kind, .. } => *kind,
        }
    }

    pub fn head(&self) -> HeadKind {
        match self {
            ModelSpec::Cnn { head, .. } | ModelSpec::Recurrent { head, .. } => *head,
        }
    }

    pub fn with_head(&self, head: HeadKind) -> ModelSpec {
        let mut spec = self.clone();
        match &mut spec {
            ModelSpec::Cnn { head: h, .. } | ModelSpec::Recurrent { head: h, .. } => *h = head,
        }
        spec
    }

    pub fn input_shape(&self) -> (usize, usize) {
        match self {
            ModelSpec::Cnn { backbone, .. } => (backbone.input_channels, backbone.input_len),
            ModelSpec::Recurrent { config, .. } => (config.input_features, config.input_len),
        }
    }

    /// Render into the `[model]` section of a config.
    pub fn render_into(&self, cfg: &mut KvConfig) {
        cfg.set("model", "kind", self.kind().as_str());
        match self.head() {
            HeadKind::Regression => cfg.set("model", "head", "regression"),
            HeadKind::Classification(c) => {
                cfg.set("model", "head", "classification");
                cfg.set("model", "classes", c);
            }
        }
        match self {
            ModelSpec::Cnn { backbone, .. } => {
                cfg.set("model", "input_channels", backbone.input_channels);
                cfg.set("model", "input_len", backbone.input_len);
                let blocks: Vec<String> = backbone
                    .blocks
                    .iter()
                    .map(|b| {
                        format!(
                            "{}:{}:{}:{}:{}",
                            b.in_channels, b.mid_channels, b.out_channels, b.conv_kernel, b.pool_size
                        )
                    })
                    .collect();
                cfg.set("model", "blocks", blocks.join(","));
                cfg.set("model", "tail_channels", backbone.tail_channels);
                cfg.set("model", "tail_kernel", backbone.tail_kernel);
                let mlp: Vec<String> = backbone.mlp.iter().map(ToString::to_string).collect();
                cfg.set("model", "mlp", mlp.join(","));
                cfg.set("model", "dropout", backbone.dropout);
            }
            ModelSpec::Recurrent { config, .. } => {
                cfg.set("model", "input_channels", config.input_features);
                cfg.set("model", "input_len", config.input_len);
                cfg.set("model", "hidden", config.hidden);
                cfg.set("model", "layers", config.layers);
                cfg.set("model", "stride", config.stride);
            }
        }
    }

    /// Parse from the `[model]` section; absent keys fall back to the
    /// defaults of the named kind.
    pub fn parse_from(cfg: &KvConfig, head: HeadKind) -> Result<ModelSpec> {
        let kind = cfg.get("model", "kind").unwrap_or("1dcnn");
        let input_channels = cfg
            .get_usize("model", "input_channels")?
            .unwrap_or(LEAD_COUNT);
        let input_len = cfg
            .get_usize("model", "input_len")?
            .unwrap_or(SAMPLES_PER_LEAD);
        let head = match cfg.get("model", "head") {
            None => head,
            Some("regression") => HeadKind::Regression,
            Some("classification") => HeadKind::Classification(
                cfg.get_usize("model", "classes")?.unwrap_or(CLASS_COUNT),
            ),
            Some(other) => {
                return Err(Error::ConfigInvalid(format!("unknown head {other:?}")))
            }
        };
        match kind {
            "1dcnn" => {
                let mut backbone = default_backbone();
                backbone.input_channels = input_channels;
                backbone.input_len = input_len;
                if let Some(text) = cfg.get("model", "blocks") {
                    backbone.blocks = parse_blocks(text)?;
                }
                if let Some(v) = cfg.get_usize("model", "tail_channels")? {
                    backbone.tail_channels = v;
                }
                if let Some(v) = cfg.get_usize("model", "tail_kernel")? {
                    backbone.tail_kernel = v;
                }
                if let Some(text) = cfg.get("model", "mlp") {
                    backbone.mlp = parse_usize_list(text)?;
                }
                if let Some(v) = cfg.get_f64("model", "dropout")? {
                    backbone.dropout = v;
                }
                backbone.validate()?;
                Ok(ModelSpec::Cnn { backbone, head })
            }
            "rnn" | "lstm" => {
                let mut config = default_recurrent();
                config.input_features = input_channels;
                config.input_len = input_len;
                if let Some(v) = cfg.get_usize("model", "hidden")? {
                    config.hidden = v;
                }
                if let Some(v) = cfg.get_usize("model", "layers")? {
                    config.layers = v;
                }
                if let Some(v) = cfg.get_usize("model", "stride")? {
                    config.stride = v;
                }
                Ok(ModelSpec::Recurrent {
                    kind: if kind == "rnn" {
                        ModelKind::Rnn
                    } else {
                        ModelKind::Lstm
                    },
                    config,
                    head,
                })
            }
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

/// The default backbone: three blocks (8->32->32, 32->64->64, 64->128->128)
/// with kernels 7/5/5 and pool 4 each, a 128-channel tail conv, and a
/// 256 -> 128 MLP with dropout 0.2.
pub fn default_backbone() -> BackboneConfig {
    BackboneConfig {
        input_channels: LEAD_COUNT,
        input_len: SAMPLES_PER_LEAD,
        blocks: vec![
            BlockConfig {
                in_channels: 8,
                mid_channels: 32,
                out_channels: 32,
                conv_kernel: 7,
                pool_size: 4,
            },
            BlockConfig {
                in_channels: 32,
                mid_channels: 64,
                out_channels: 64,
                conv_kernel: 5,
                pool_size: 4,
            },
            BlockConfig {
                in_channels: 64,
                mid_channels: 128,
                out_channels: 128,
                conv_kernel: 5,
                pool_size: 4,
            },
        ],
        tail_channels: 128,
        tail_kernel: 3,
        mlp: vec![256, 128],
        dropout: 0.2,
    }
}

/// Default recurrent baseline: three stacked layers, hidden 128, input
/// strided by 10 for speed.
pub fn default_recurrent() -> RecurrentConfig {
    RecurrentConfig {
        input_features: LEAD_COUNT,
        input_len: SAMPLES_PER_LEAD,
        hidden: 128,
        layers: 3,
        stride: 10,
    }
}

fn parse_blocks(text: &str) -> Result<Vec<BlockConfig>> {
    text.split(',')
        .map(|chunk| {
            let parts: Vec<&str> = chunk.trim().split(':').collect();
            if parts.len() != 5 {
                return Err(Error::ConfigInvalid(format!(
                    "block must be in:mid:out:kernel:pool, got {chunk:?}"
                )));
            }
            let nums: Result<Vec<usize>> = parts
                .iter()
                .map(|p| {
                    p.parse()
                        .map_err(|_| Error::ConfigInvalid(format!("bad block field {p:?}")))
                })
                .collect();
            let nums = nums?;
            Ok(BlockConfig {
                in_channels: nums[0],
                mid_channels: nums[1],
                out_channels: nums[2],
                conv_kernel: nums[3],
                pool_size: nums[4],
            })
        })
        .collect()
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::ConfigInvalid(format!("bad integer {p:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_backbone_shapes() {
        let b = default_backbone();
        b.validate().unwrap();
        assert_eq!(b.final_len().unwrap(), 78); // 5000 -> 1250 -> 312 -> 78
        assert_eq!(b.flatten_dim().unwrap(), 128 * 78);
    }

    #[test]
    fn shape_inference_detects_collapse() {
        let mut b = default_backbone();
        b.blocks[0].pool_size = 5000;
        b.blocks[1].pool_size = 2;
        assert!(matches!(b.final_len(), Err(Error::ShapeInference(_))));
    }

    #[test]
    fn validate_rejects_broken_chains_and_even_kernels() {
        let mut b = default_backbone();
        b.blocks[1].in_channels = 99;
        assert!(b.validate().is_err());

        let mut b = default_backbone();
        b.blocks[0].conv_kernel = 6;
        assert!(b.validate().is_err());
    }

    #[test]
    fn spec_round_trips_through_config_text() {
        let spec = ModelSpec::Cnn {
            backbone: default_backbone(),
            head: HeadKind::Classification(5),
        };
        let mut cfg = KvConfig::default();
        spec.render_into(&mut cfg);
        let reparsed =
            ModelSpec::parse_from(&KvConfig::parse(&cfg.render()).unwrap(), HeadKind::Regression)
                .unwrap();
        assert_eq!(reparsed, spec);

        let rec = ModelSpec::Recurrent {
            kind: ModelKind::Lstm,
            config: default_recurrent(),
            head: HeadKind::Regression,
        };
        let mut cfg = KvConfig::default();
        rec.render_into(&mut cfg);
        let reparsed =
            ModelSpec::parse_from(&KvConfig::parse(&cfg.render()).unwrap(), HeadKind::Regression)
                .unwrap();
        assert_eq!(reparsed, rec);
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let cfg = KvConfig::parse("[model]\nkind = vit\n").unwrap();
        assert!(matches!(
            ModelSpec::parse_from(&cfg, HeadKind::Regression),
            Err(Error::UnknownModel(_))
        ));
    }
}
