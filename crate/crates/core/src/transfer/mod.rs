//! Regression-to-classification transfer: convert a pretrained regression
//! model into a classifier by replacing its final layer, optionally freeze
//! the first seven enumerated layers, retrain on the classification subset,
//! and run the full 2 datasets x 4 parameters x 2 modes experiment grid plus
//! the no-transfer baseline.

use std::path::{Path, PathBuf};

use crate::dataset::{LabeledRecord, RegressionParam, Task, CLASS_COUNT};
use crate::model::{HeadKind, ModelKind, Network};
use crate::training::{
    checkpoint, evaluate_with_scores, fit_from, MetricBundle, TrainConfig, TrainState,
};
use crate::metrics::ScoreMatrix;
use crate::{rng, Error, Result};

/// Number of leaf layers frozen in the frozen mode.
pub const FROZEN_PREFIX: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceDataset {
    RealSetA,
    Synthetic,
}

impl SourceDataset {
    pub const ALL: [SourceDataset; 2] = [SourceDataset::RealSetA, SourceDataset::Synthetic];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceDataset::RealSetA => "real-setA",
            SourceDataset::Synthetic => "synthetic",
        }
    }
}

impl std::str::FromStr for SourceDataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown source dataset {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreezeMode {
    Frozen7,
    None,
}

impl FreezeMode {
    pub const ALL: [FreezeMode; 2] = [FreezeMode::Frozen7, FreezeMode::None];

    pub fn as_str(self) -> &'static str {
        match self {
            FreezeMode::Frozen7 => "frozen-7",
            FreezeMode::None => "none",
        }
    }

    pub fn prefix_len(self) -> usize {
        match self {
            FreezeMode::Frozen7 => FROZEN_PREFIX,
            FreezeMode::None => 0,
        }
    }
}

impl std::str::FromStr for FreezeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown freeze mode {s:?}")))
    }
}

/// One cell of the 16-experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransferConfig {
    pub source: SourceDataset,
    pub parameter: RegressionParam,
    pub freeze: FreezeMode,
    pub seed: u64,
}

/// A grid entry: the no-transfer baseline or one transfer cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridRun {
    Baseline { seed: u64 },
    Transfer(TransferConfig),
}

impl GridRun {
    /// Row labels used in results tables: (setting, parameter).
    pub fn labels(&self) -> (String, String) {
        match self {
            GridRun::Baseline { .. } => ("baseline".into(), "-".into()),
            GridRun::Transfer(c) => (
                format!("{} {}", c.source.as_str(), c.freeze.as_str()),
                c.parameter.as_str().to_string(),
            ),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            GridRun::Baseline { seed } => *seed,
            GridRun::Transfer(c) => c.seed,
        }
    }

    /// Directory slug for per-run artifacts.
    pub fn slug(&self) -> String {
        match self {
            GridRun::Baseline { .. } => "baseline".into(),
            GridRun::Transfer(c) => format!(
                "{}-{}-{}",
                c.source.as_str(),
                c.freeze.as_str(),
                c.parameter.key()
            ),
        }
    }
}

/// Enumerate the full cross-product plus the baseline, in stable order:
/// baseline first, then dataset-major, mode-middle, parameter-minor.
/// Per-run seeds derive from the base seed and the run position.
pub fn build_grid(base_seed: u64) -> Vec<GridRun> {
    let mut runs = vec![GridRun::Baseline {
        seed: rng::mix(base_seed, 0),
    }];
    let mut index = 1u64;
    for source in SourceDataset::ALL {
        for freeze in FreezeMode::ALL {
            for parameter in RegressionParam::ALL {
                runs.push(GridRun::Transfer(TransferConfig {
                    source,
                    parameter,
                    freeze,
                    seed: rng::mix(base_seed, index),
                }));
                index += 1;
            }
        }
    }
    runs
}

/// Filter expression for grid runs: comma-separated `key=value` terms, all
/// of which must match. Keys: `setting` (baseline|transfer), `dataset`,
/// `mode`, `param`.
pub fn filter_grid(runs: &[GridRun], filter: &str) -> Result<Vec<GridRun>> {
    let mut keep: Vec<GridRun> = runs.to_vec();
    for term in filter.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (key, value) = term
            .split_once('=')
            .ok_or_else(|| Error::ConfigInvalid(format!("bad filter term {term:?}")))?;
        let value = value.trim();
        keep.retain(|run| match (key.trim(), run) {
            ("setting", GridRun::Baseline { .. }) => value == "baseline",
            ("setting", GridRun::Transfer(_)) => value == "transfer",
            ("dataset", GridRun::Transfer(c)) => c.source.as_str() == value,
            ("mode", GridRun::Transfer(c)) => c.freeze.as_str() == value,
            ("param", GridRun::Transfer(c)) => {
                c.parameter.key() == value.to_ascii_lowercase()
            }
            _ => false,
        });
    }
    Ok(keep)
}

/// Replace the regression head of a pretrained 1D-CNN with a freshly
/// initialized 5-way classification head. Backbone and hidden MLP layers are
/// copied verbatim; only the final linear layer is reinitialized.
pub fn swap_head(pretrained: &Network, seed: u64) -> Result<Network> {
    if pretrained.spec.kind() != ModelKind::OneDCnn {
        return Err(Error::IncompatibleArchitecture(format!(
            "transfer expects the 1D-CNN backbone, got {}",
            pretrained.spec.kind().as_str()
        )));
    }
    if pretrained.spec.head() != HeadKind::Regression {
        return Err(Error::IncompatibleArchitecture(
            "transfer source must carry a regression head".into(),
        ));
    }
    let mut model = pretrained.clone();
    model.replace_head(HeadKind::Classification(CLASS_COUNT), seed)?;
    Ok(model)
}

/// Set the first `n` enumerated leaf layers non-trainable and the rest
/// trainable. `n = 0` makes everything trainable.
pub fn freeze_prefix(model: &mut Network, n: usize) -> Result<()> {
    let leaves = model.leaf_count();
    if n > leaves {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: leaves,
        });
    }
    for i in 0..leaves {
        model.set_leaf_trainable(i, i >= n)?;
    }
    Ok(())
}

/// Everything a grid run needs from its environment.
pub struct TransferEnv<'a> {
    /// Classification train split (Set B).
    pub train: &'a [LabeledRecord],
    pub val: &'a [LabeledRecord],
    pub test: &'a [LabeledRecord],
    pub config: TrainConfig,
    /// Digest of the split manifest; recorded per run so baseline and
    /// transfer provably share the same Set-B splits.
    pub manifest_digest: String,
    /// Model used when training the baseline from scratch.
    pub baseline_spec: crate::model::ModelSpec,
}

/// Outcome of one grid run: metric bundles for all three splits, computed
/// from the best-validation checkpoint exactly once.
pub struct TransferResult {
    pub run: GridRun,
    pub train_metrics: MetricBundle,
    pub val_metrics: MetricBundle,
    pub test_metrics: MetricBundle,
    pub test_scores: Option<ScoreMatrix>,
    pub history: crate::training::History,
    pub best_state: TrainState,
    pub manifest_digest: String,
}

/// Locate the pretrained regression checkpoint for a grid cell under
/// `checkpoints_dir/<dataset>/<param>/checkpoint.bin`.
pub fn checkpoint_path(dir: &Path, source: SourceDataset, parameter: RegressionParam) -> PathBuf {
    dir.join(source.as_str())
        .join(parameter.key())
        .join("checkpoint.bin")
}

/// Execute one grid run: load the pretrained checkpoint (transfer cells) or
/// build a fresh model (baseline), swap the head, apply the freeze mode,
/// fit on the classification train/val splits, and evaluate train/val/test
/// from the best checkpoint.
pub fn run_transfer(run: GridRun, checkpoints_dir: &Path, env: &TransferEnv) -> Result<TransferResult> {
    let model = match run {
        GridRun::Baseline { seed } => Network::build(&env.baseline_spec, seed)?,
        GridRun::Transfer(cell) => {
            let path = checkpoint_path(checkpoints_dir, cell.source, cell.parameter);
            let (pretrained, _) = checkpoint::load(&path)?;
            let mut model = swap_head(&pretrained.network, cell.seed)?;
            freeze_prefix(&mut model, cell.freeze.prefix_len())?;
            model
        }
    };

    let state = TrainState::new(model, Task::Classification, env.config.clone(), run.seed());
    let outcome = fit_from(state, env.train, env.val)?;
    let mut best = outcome.best;

    let batch = env.config.batch_size;
    let train_metrics = crate::training::evaluate(&mut best.network, env.train, Task::Classification, batch)?;
    let val_metrics = crate::training::evaluate(&mut best.network, env.val, Task::Classification, batch)?;
    let (test_metrics, test_scores) =
        evaluate_with_scores(&mut best.network, env.test, Task::Classification, batch)?;

    Ok(TransferResult {
        run,
        train_metrics,
        val_metrics,
        test_metrics,
        test_scores,
        history: outcome.last.history.clone(),
        best_state: best,
        manifest_digest: env.manifest_digest.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ClassLabel, RegressionTargets};
    use crate::model::{BackboneConfig, BlockConfig, Mode, ModelSpec};
    use crate::signal::{EcgMatrix, LEAD_COUNT, SAMPLES_PER_LEAD};

    fn tiny_spec(head: HeadKind) -> ModelSpec {
        ModelSpec::Cnn {
            backbone: BackboneConfig {
                input_channels: LEAD_COUNT,
                input_len: SAMPLES_PER_LEAD,
                blocks: vec![
                    BlockConfig {
                        in_channels: 8,
                        mid_channels: 4,
                        out_channels: 4,
                        conv_kernel: 3,
                        pool_size: 16,
                    },
                    BlockConfig {
                        in_channels: 4,
                        mid_channels: 4,
                        out_channels: 4,
                        conv_kernel: 3,
                        pool_size: 16,
                    },
                ],
                tail_channels: 4,
                tail_kernel: 3,
                mlp: vec![8],
                dropout: 0.0,
            },
            head,
        }
    }

    fn records(n: usize) -> Vec<LabeledRecord> {
        (0..n)
            .map(|i| {
                let level = (i % 7) as f32 / 7.0;
                let mut values = vec![level; LEAD_COUNT * SAMPLES_PER_LEAD];
                for lead in 0..LEAD_COUNT {
                    values[lead * SAMPLES_PER_LEAD] = 0.0;
                    values[lead * SAMPLES_PER_LEAD + 1] = 1.0;
                }
                LabeledRecord::new(
                    format!("r{i:03}"),
                    EcgMatrix::from_values(values).unwrap(),
                    Some(ClassLabel::from_index(i % 5).unwrap()),
                    RegressionTargets {
                        qrs_ms: Some(80.0 + 10.0 * level as f64),
                        ..Default::default()
                    },
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn grid_has_17_stable_runs() {
        let a = build_grid(42);
        let b = build_grid(42);
        assert_eq!(a, b);
        assert_eq!(a.len(), 17);
        assert!(matches!(a[0], GridRun::Baseline { .. }));
        // every (dataset, parameter, mode) cell exactly once
        let mut cells: Vec<(SourceDataset, RegressionParam, FreezeMode)> = a
            .iter()
            .filter_map(|r| match r {
                GridRun::Transfer(c) => Some((c.source, c.parameter, c.freeze)),
                _ => None,
            })
            .collect();
        let total = cells.len();
        cells.dedup();
        assert_eq!(total, 16);
        assert_eq!(cells.len(), 16);
    }

    #[test]
    fn grid_filters() {
        let grid = build_grid(0);
        assert_eq!(
            filter_grid(&grid, "mode=frozen-7").unwrap().len(),
            8
        );
        assert_eq!(filter_grid(&grid, "setting=baseline").unwrap().len(), 1);
        assert_eq!(
            filter_grid(&grid, "dataset=synthetic,param=qt").unwrap().len(),
            2
        );
        assert!(filter_grid(&grid, "nonsense").is_err());
    }

    #[test]
    fn swap_head_copies_backbone_bit_exactly() {
        let pretrained = Network::build(&tiny_spec(HeadKind::Regression), 5).unwrap();
        let swapped = swap_head(&pretrained, 99).unwrap();
        let before = pretrained.param_tensors();
        let after = swapped.param_tensors();
        assert_eq!(before.len(), after.len());
        // all but the final (weight, bias) pair identical
        for (b, a) in before.iter().zip(&after).take(before.len() - 2) {
            assert_eq!(b.data, a.data);
        }
        assert_eq!(swapped.output_dim(), 5);
        // forward works and yields 5 columns
        let mut rng = crate::rng::seeded(0);
        let x = crate::model::tensor::Tensor3::zeros(2, LEAD_COUNT, SAMPLES_PER_LEAD);
        let out = swapped.clone().forward(&x, Mode::Eval, &mut rng).unwrap();
        assert_eq!(out.cols, 5);
        // same source + same seed -> identical head init
        let again = swap_head(&pretrained, 99).unwrap();
        assert!(again.params_equal(&swapped));
    }

    #[test]
    fn swap_head_rejects_wrong_sources() {
        let classifier = Network::build(&tiny_spec(HeadKind::Classification(5)), 5).unwrap();
        assert!(matches!(
            swap_head(&classifier, 0),
            Err(Error::IncompatibleArchitecture(_))
        ));
        let rnn = crate::model::registry_build("rnn", HeadKind::Regression, 0).unwrap();
        assert!(matches!(
            swap_head(&rnn, 0),
            Err(Error::IncompatibleArchitecture(_))
        ));
    }

    #[test]
    fn freeze_prefix_sets_flags() {
        let mut model = Network::build(&tiny_spec(HeadKind::Classification(5)), 1).unwrap();
        freeze_prefix(&mut model, 7).unwrap();
        let infos = model.enumerate_layers();
        let frozen: Vec<bool> = infos.iter().map(|i| !i.trainable).collect();
        assert_eq!(frozen.iter().filter(|&&f| f).count(), 7);
        assert!(frozen[..7].iter().all(|&f| f));
        // n = 0 restores full trainability
        freeze_prefix(&mut model, 0).unwrap();
        assert!(model.enumerate_layers().iter().all(|i| i.trainable));
        // out of range
        let len = model.leaf_count();
        assert!(matches!(
            freeze_prefix(&mut model, len + 1),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn frozen_layers_survive_training_bit_identically() {
        let all = records(30);
        let (train, rest) = all.split_at(20);
        let (val, _) = rest.split_at(5);

        let pretrained = Network::build(&tiny_spec(HeadKind::Regression), 5).unwrap();
        let mut model = swap_head(&pretrained, 3).unwrap();
        freeze_prefix(&mut model, 7).unwrap();
        let frozen_before: Vec<Vec<f64>> = model
            .param_tensors()
            .iter()
            .map(|p| p.data.clone())
            .collect();

        let cfg = TrainConfig {
            max_epochs: 5,
            batch_size: 8,
            ..Default::default()
        };
        let state = TrainState::new(model, Task::Classification, cfg, 1);
        let outcome = fit_from(state, train, val).unwrap();
        let after = outcome.last.network.param_tensors();

        let ranges = outcome.last.network.leaf_param_ranges();
        let mut changed_somewhere = false;
        for (leaf, &(start, end)) in ranges.iter().enumerate() {
            for t in start..end {
                if leaf < 7 {
                    assert_eq!(
                        after[t].data, frozen_before[t],
                        "frozen leaf {leaf} tensor {t} changed"
                    );
                } else if after[t].data != frozen_before[t] {
                    changed_somewhere = true;
                }
            }
        }
        assert!(changed_somewhere, "no unfrozen parameter changed");
    }

    #[test]
    fn run_transfer_missing_checkpoint() {
        let all = records(20);
        let env = TransferEnv {
            train: &all[..10],
            val: &all[10..15],
            test: &all[15..],
            config: TrainConfig {
                max_epochs: 1,
                batch_size: 8,
                ..Default::default()
            },
            manifest_digest: "d".into(),
            baseline_spec: tiny_spec(HeadKind::Classification(5)),
        };
        let run = GridRun::Transfer(TransferConfig {
            source: SourceDataset::Synthetic,
            parameter: RegressionParam::Qt,
            freeze: FreezeMode::None,
            seed: 0,
        });
        match run_transfer(run, Path::new("/nonexistent"), &env) {
            Err(Error::MissingCheckpoint(_)) => {}
            Err(other) => panic!("unexpected error: {other:?}"),
            Ok(_) => panic!("expected MissingCheckpoint"),
        }
    }

    #[test]
    fn baseline_run_completes_with_all_metrics() {
        let all = records(30);
        let env = TransferEnv {
            train: &all[..20],
            val: &all[20..25],
            test: &all[25..],
            config: TrainConfig {
                max_epochs: 2,
                batch_size: 8,
                ..Default::default()
            },
            manifest_digest: "digest".into(),
            baseline_spec: tiny_spec(HeadKind::Classification(5)),
        };
        let result = run_transfer(
            GridRun::Baseline { seed: 7 },
            Path::new("/nonexistent"),
            &env,
        )
        .unwrap();
        for bundle in [&result.train_metrics, &result.val_metrics, &result.test_metrics] {
            assert!(bundle.accuracy.is_some());
            assert!(bundle.auc.is_some());
        }
        assert!(result.test_scores.is_some());
        assert_eq!(result.manifest_digest, "digest");
        assert_eq!(result.history.rows.len(), 2);
    }
}
