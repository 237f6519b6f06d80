//! The epoch loop: one optimizer step per batch, one scheduler step per
//! epoch, validation after every epoch, early stopping on the validation
//! metric with the configured patience, and best-checkpoint tracking.

use super::loss::{cross_entropy_grad, cross_entropy_loss, l1_loss_grad};
use super::optim::Adam;
use super::schedule::{lr_at_epoch, TrainConfig};
use crate::dataset::{batch_iter, Batch, BatchTargets, LabeledRecord, Task};
use crate::metrics::{accuracy, auc_ovr, mae, predicted_classes, ScoreMatrix};
use crate::model::tensor::Tensor2;
use crate::model::{softmax_rows, Mode, Network};
use crate::{rng, Error, Result};

/// One history row; the CSV form is `epoch,split,metric,value,lr`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: u32,
    pub train_loss: f64,
    pub val_metric: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    pub rows: Vec<EpochRow>,
    pub val_metric_name: String,
}

impl History {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,split,metric,value,lr\n");
        for r in &self.rows {
            out.push_str(&format!("{},train,loss,{},{}\n", r.epoch, r.train_loss, r.lr));
            out.push_str(&format!(
                "{},val,{},{},{}\n",
                r.epoch, self.val_metric_name, r.val_metric, r.lr
            ));
        }
        out
    }
}

/// Metrics of one split: the task loss plus MAE (regression) or
/// accuracy/AUC (classification).
#[derive(Debug, Clone)]
pub struct MetricBundle {
    pub loss: f64,
    pub mae: Option<f64>,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
    pub auc_per_class: Option<Vec<Option<f64>>>,
}

/// Complete training state; everything needed to continue a run exactly
/// where it stopped.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub network: Network,
    pub optimizer: Adam,
    pub task: Task,
    pub config: TrainConfig,
    pub seed: u64,
    pub epoch: u32,
    pub best_val_metric: f64,
    pub best_epoch: u32,
    pub epochs_since_improvement: u32,
    pub history: History,
}

impl TrainState {
    pub fn new(network: Network, task: Task, config: TrainConfig, seed: u64) -> Self {
        let optimizer = Adam::new(&network, config.beta1, config.beta2, config.epsilon);
        let (best, name) = match task {
            Task::Regression(_) => (f64::INFINITY, "mae"),
            Task::Classification => (f64::NEG_INFINITY, "auc"),
        };
        TrainState {
            network,
            optimizer,
            task,
            config,
            seed,
            epoch: 0,
            best_val_metric: best,
            best_epoch: 0,
            epochs_since_improvement: 0,
            history: History {
                rows: Vec::new(),
                val_metric_name: name.to_string(),
            },
        }
    }

    fn should_stop(&self) -> bool {
        self.epochs_since_improvement >= self.config.patience
            || self.epoch >= self.config.max_epochs
    }
}

#[derive(Debug)]
pub struct FitOutcome {
    /// Snapshot of the full state at the best-validation epoch.
    pub best: TrainState,
    /// State after the final epoch (for resuming).
    pub last: TrainState,
    /// Records excluded from the train split for lacking the target.
    pub excluded_train: usize,
}

/// Train a fresh model until early stopping or `max_epochs`.
pub fn fit(
    network: Network,
    train: &[LabeledRecord],
    val: &[LabeledRecord],
    task: Task,
    config: &TrainConfig,
    seed: u64,
) -> Result<FitOutcome> {
    fit_from(TrainState::new(network, task, config.clone(), seed), train, val)
}

/// Continue training from a state (fresh or loaded from a checkpoint).
pub fn fit_from(
    mut state: TrainState,
    train: &[LabeledRecord],
    val: &[LabeledRecord],
) -> Result<FitOutcome> {
    let mut best: Option<TrainState> = None;
    let mut excluded_train = 0;
    while !state.should_stop() {
        let outcome = run_one_epoch(&mut state, train, val)?;
        excluded_train = outcome.excluded;
        if outcome.improved {
            best = Some(state.clone());
        }
    }
    // A resumed run may already be past its best epoch; fall back to the
    // current state so callers always get a model.
    let best = best.unwrap_or_else(|| state.clone());
    Ok(FitOutcome {
        best,
        last: state,
        excluded_train,
    })
}

struct EpochOutcome {
    improved: bool,
    excluded: usize,
}

fn run_one_epoch(
    state: &mut TrainState,
    train: &[LabeledRecord],
    val: &[LabeledRecord],
) -> Result<EpochOutcome> {
    let epoch = state.epoch;
    let lr = lr_at_epoch(&state.config, epoch);
    let (batches, excluded) = batch_iter(
        train,
        state.task,
        state.config.batch_size,
        Some((state.seed, epoch)),
    )?;
    let mut loss_sum = 0.0;
    let mut seen = 0usize;
    let mut batch_count = 0usize;
    for (bi, batch) in batches.enumerate() {
        let n = batch.indices.len();
        let loss = train_step(state, &batch, bi, lr)?;
        if !loss.is_finite() {
            return Err(Error::DivergedLoss { epoch, batch: bi });
        }
        loss_sum += loss * n as f64;
        seen += n;
        batch_count = bi + 1;
    }
    let train_loss = loss_sum / seen as f64;

    let bundle = evaluate(&mut state.network, val, state.task, state.config.batch_size)?;
    let val_metric = match state.task {
        Task::Regression(_) => bundle.mae.expect("regression bundle carries mae"),
        Task::Classification => bundle.auc.expect("classification bundle carries auc"),
    };
    if !val_metric.is_finite() {
        // batch index past the end marks divergence surfacing at validation
        return Err(Error::DivergedLoss {
            epoch,
            batch: batch_count,
        });
    }
    let improved = match state.task {
        Task::Regression(_) => val_metric < state.best_val_metric,
        Task::Classification => val_metric > state.best_val_metric,
    };
    state.history.rows.push(EpochRow {
        epoch,
        train_loss,
        val_metric,
        lr,
    });
    state.epoch += 1;
    if improved {
        state.best_val_metric = val_metric;
        state.best_epoch = epoch;
        state.epochs_since_improvement = 0;
    } else {
        state.epochs_since_improvement += 1;
    }
    Ok(EpochOutcome { improved, excluded })
}

fn train_step(state: &mut TrainState, batch: &Batch, batch_index: usize, lr: f64) -> Result<f64> {
    // Dropout noise is a pure function of (seed, epoch, batch), so resumed
    // runs replay the exact same masks.
    let mut dropout_rng = rng::seeded(rng::mix3(
        state.seed,
        0xD80u64 ^ ((state.epoch as u64) << 20),
        batch_index as u64,
    ));
    let logits = state
        .network
        .forward(&batch.signals, Mode::Train, &mut dropout_rng)?;
    let (loss, grad) = match (&batch.targets, state.task) {
        (BatchTargets::Scalar(targets), Task::Regression(_)) => {
            let preds: Vec<f64> = (0..logits.rows).map(|r| logits.row(r)[0]).collect();
            let (loss, grad_vec) = l1_loss_grad(&preds, targets)?;
            let mut grad = Tensor2::zeros(logits.rows, 1);
            for (r, g) in grad_vec.into_iter().enumerate() {
                grad.row_mut(r)[0] = g;
            }
            (loss, grad)
        }
        (BatchTargets::OneHot(one_hot), Task::Classification) => {
            cross_entropy_grad(&logits, one_hot)?
        }
        _ => {
            return Err(Error::ShapeMismatch(
                "batch targets do not match the task".into(),
            ))
        }
    };
    state.network.zero_grads();
    state.network.backward(grad)?;
    state.optimizer.step(&mut state.network, lr);
    Ok(loss)
}

/// Evaluate a split in eval mode (fixed batch order, running statistics,
/// no dropout). Delegates metric math to [`crate::metrics`].
pub fn evaluate(
    network: &mut Network,
    records: &[LabeledRecord],
    task: Task,
    batch_size: usize,
) -> Result<MetricBundle> {
    Ok(evaluate_with_scores(network, records, task, batch_size)?.0)
}

/// Like [`evaluate`] but also returns the score matrix (classification only)
/// for ROC dumps.
pub fn evaluate_with_scores(
    network: &mut Network,
    records: &[LabeledRecord],
    task: Task,
    batch_size: usize,
) -> Result<(MetricBundle, Option<ScoreMatrix>)> {
    let (batches, _) = batch_iter(records, task, batch_size, None)?;
    let mut eval_rng = rng::seeded(0);
    match task {
        Task::Regression(_) => {
            let mut preds = Vec::new();
            let mut targets = Vec::new();
            for batch in batches {
                let logits = network.forward(&batch.signals, Mode::Eval, &mut eval_rng)?;
                preds.extend((0..logits.rows).map(|r| logits.row(r)[0]));
                match batch.targets {
                    BatchTargets::Scalar(t) => targets.extend(t),
                    _ => unreachable!("regression batches carry scalar targets"),
                }
            }
            let err = mae(&targets, &preds)?;
            Ok((
                MetricBundle {
                    loss: err,
                    mae: Some(err),
                    accuracy: None,
                    auc: None,
                    auc_per_class: None,
                },
                None,
            ))
        }
        Task::Classification => {
            let mut all_logits: Vec<f64> = Vec::new();
            let mut all_one_hot: Vec<f64> = Vec::new();
            let mut labels: Vec<usize> = Vec::new();
            let mut cols = 0;
            for batch in batches {
                let logits = network.forward(&batch.signals, Mode::Eval, &mut eval_rng)?;
                cols = logits.cols;
                match &batch.targets {
                    BatchTargets::OneHot(t) => {
                        for r in 0..t.rows {
                            labels.push(
                                t.row(r).iter().position(|&y| y == 1.0).expect("one-hot row"),
                            );
                        }
                        all_one_hot.extend_from_slice(&t.data);
                    }
                    _ => unreachable!("classification batches carry one-hot targets"),
                }
                all_logits.extend_from_slice(&logits.data);
            }
            let rows = labels.len();
            let logits = Tensor2 {
                rows,
                cols,
                data: all_logits,
            };
            let one_hot = Tensor2 {
                rows,
                cols,
                data: all_one_hot,
            };
            let loss = cross_entropy_loss(&logits, &one_hot)?;
            let probs = softmax_rows(&logits);
            let scores = ScoreMatrix::new(probs.data, cols, labels.clone())?;
            let acc = accuracy(&predicted_classes(&scores), &labels)?;
            let ovr = auc_ovr(&scores)?;
            Ok((
                MetricBundle {
                    loss,
                    mae: None,
                    accuracy: Some(acc),
                    auc: Some(ovr.mean),
                    auc_per_class: Some(ovr.per_class),
                },
                Some(scores),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ClassLabel, RegressionTargets};
    use crate::model::{BackboneConfig, BlockConfig, HeadKind, ModelSpec};
    use crate::signal::{EcgMatrix, LEAD_COUNT, SAMPLES_PER_LEAD};

    pub(crate) fn tiny_spec(head: HeadKind) -> ModelSpec {
        ModelSpec::Cnn {
            backbone: BackboneConfig {
                input_channels: LEAD_COUNT,
                input_len: SAMPLES_PER_LEAD,
                blocks: vec![BlockConfig {
                    in_channels: 8,
                    mid_channels: 4,
                    out_channels: 4,
                    conv_kernel: 3,
                    pool_size: 64,
                }],
                tail_channels: 4,
                tail_kernel: 3,
                mlp: vec![8],
                dropout: 0.1,
            },
            head,
        }
    }

    /// Records whose HR target is recoverable from the mean signal level.
    fn level_records(n: usize) -> Vec<LabeledRecord> {
        (0..n)
            .map(|i| {
                let level = (i % 10) as f32 / 10.0;
                let mut values = vec![0.0f32; LEAD_COUNT * SAMPLES_PER_LEAD];
                for (j, v) in values.iter_mut().enumerate() {
                    // keep per-lead min 0 max 1 while moving the mean
                    *v = if j % SAMPLES_PER_LEAD == 0 {
                        0.0
                    } else if j % SAMPLES_PER_LEAD == 1 {
                        1.0
                    } else {
                        level
                    };
                }
                LabeledRecord::new(
                    format!("r{i:03}"),
                    EcgMatrix::from_values(values).unwrap(),
                    Some(ClassLabel::from_index(i % 5).unwrap()),
                    RegressionTargets {
                        hr_bpm: Some(60.0 + 40.0 * level as f64),
                        ..Default::default()
                    },
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn history_csv_layout() {
        let h = History {
            rows: vec![EpochRow {
                epoch: 0,
                train_loss: 1.5,
                val_metric: 2.25,
                lr: 0.01,
            }],
            val_metric_name: "mae".into(),
        };
        assert_eq!(
            h.to_csv(),
            "epoch,split,metric,value,lr\n0,train,loss,1.5,0.01\n0,val,mae,2.25,0.01\n"
        );
    }

    #[test]
    fn fit_runs_and_is_deterministic() {
        let records = level_records(24);
        let (train, val) = records.split_at(16);
        let cfg = TrainConfig {
            max_epochs: 3,
            batch_size: 8,
            ..Default::default()
        };
        let run = || {
            let net = crate::model::Network::build(
                &tiny_spec(HeadKind::Regression),
                7,
            )
            .unwrap();
            fit(
                net,
                train,
                val,
                Task::Regression(crate::dataset::RegressionParam::Hr),
                &cfg,
                55,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.last.history, b.last.history);
        assert_eq!(a.last.epoch, 3);
        assert!(a.last.network.params_equal(&b.last.network));
        // lr recorded follows the closed form
        assert_eq!(a.last.history.rows[2].lr, 0.01 * 0.99 * 0.99);
    }

    #[test]
    fn patience_stops_training_at_51_epochs_when_nothing_improves() {
        // A fully frozen recurrent model carries no running statistics, so
        // its validation metric is exactly constant: the first epoch is the
        // only improvement and patience runs out after 50 more epochs.
        let records = level_records(12);
        let (train, val) = records.split_at(8);
        let spec = ModelSpec::Recurrent {
            kind: crate::model::ModelKind::Rnn,
            config: crate::model::RecurrentConfig {
                input_features: LEAD_COUNT,
                input_len: SAMPLES_PER_LEAD,
                hidden: 3,
                layers: 1,
                stride: 500,
            },
            head: HeadKind::Regression,
        };
        let mut net = crate::model::Network::build(&spec, 3).unwrap();
        for i in 0..net.leaf_count() {
            net.set_leaf_trainable(i, false).unwrap();
        }
        let cfg = TrainConfig {
            max_epochs: 500,
            batch_size: 8,
            ..Default::default()
        };
        let outcome = fit(
            net,
            train,
            val,
            Task::Regression(crate::dataset::RegressionParam::Hr),
            &cfg,
            1,
        )
        .unwrap();
        assert_eq!(outcome.last.epoch, 51);
        assert_eq!(outcome.best.best_epoch, 0);
        assert_eq!(outcome.last.epochs_since_improvement, 50);
    }

    #[test]
    fn evaluate_is_repeatable_and_perfect_predictor_scores_perfectly() {
        let records = level_records(10);
        let mut net =
            crate::model::Network::build(&tiny_spec(HeadKind::Classification(5)), 2).unwrap();
        let a = evaluate(&mut net, &records, Task::Classification, 4).unwrap();
        let b = evaluate(&mut net, &records, Task::Classification, 4).unwrap();
        assert_eq!(a.loss, b.loss);
        assert_eq!(a.auc, b.auc);
        assert_eq!(a.accuracy, b.accuracy);
    }

    #[test]
    fn constant_classifier_scores_majority_share_and_half_auc() {
        // all-zero signals through a fresh network give identical rows:
        // argmax ties resolve to class 0, per-class AUC is the tie value 0.5
        let records: Vec<LabeledRecord> = (0..10)
            .map(|i| {
                LabeledRecord::new(
                    format!("z{i}"),
                    EcgMatrix::zeros(),
                    // class 0 appears 4 times, others less often
                    Some(ClassLabel::from_index([0, 0, 0, 0, 1, 1, 2, 2, 3, 4][i]).unwrap()),
                    RegressionTargets::default(),
                )
                .unwrap()
            })
            .collect();
        let mut net =
            crate::model::Network::build(&tiny_spec(HeadKind::Classification(5)), 4).unwrap();
        let bundle = evaluate(&mut net, &records, Task::Classification, 4).unwrap();
        assert_eq!(bundle.accuracy, Some(0.4));
        assert_eq!(bundle.auc, Some(0.5));
        for auc in bundle.auc_per_class.unwrap().iter().flatten() {
            assert_eq!(*auc, 0.5);
        }
    }

    #[test]
    fn diverged_loss_is_detected() {
        let records = level_records(8);
        let mut net =
            crate::model::Network::build(&tiny_spec(HeadKind::Regression), 3).unwrap();
        // poison the head weight so the loss itself goes non-finite (earlier
        // layers would be masked by ReLU)
        let mut tensors = net.param_tensors_mut();
        let head_weight = tensors.len() - 2;
        tensors[head_weight].0.data[0] = f64::NAN;
        drop(tensors);
        let cfg = TrainConfig {
            max_epochs: 1,
            batch_size: 4,
            ..Default::default()
        };
        let err = fit(
            net,
            &records[..6],
            &records[6..],
            Task::Regression(crate::dataset::RegressionParam::Hr),
            &cfg,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DivergedLoss { epoch: 0, .. }));
    }
}
