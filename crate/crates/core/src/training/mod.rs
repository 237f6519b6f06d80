//! Training: loss functions, Adam, the exponential LR schedule, the epoch
//! loop with early stopping, evaluation, and checkpoints.

pub mod checkpoint;
mod fit;
mod loss;
mod optim;
mod schedule;

pub use fit::{
    evaluate, evaluate_with_scores, fit, fit_from, EpochRow, FitOutcome, History, MetricBundle,
    TrainState,
};
pub use loss::{cross_entropy_grad, cross_entropy_loss, l1_loss, l1_loss_grad};
pub use optim::Adam;
pub use schedule::{lr_at_epoch, SchedulerState, TrainConfig};

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::dataset::{ClassLabel, LabeledRecord, RegressionParam, RegressionTargets, Task};
    use crate::model::{BackboneConfig, BlockConfig, HeadKind, ModelSpec, Network};
    use crate::signal::{EcgMatrix, LEAD_COUNT, SAMPLES_PER_LEAD};

    /// A tiny but real setup shared by training tests: full-size inputs,
    /// minimal channel counts.
    pub(crate) fn tiny_regression_setup() -> (Vec<LabeledRecord>, ModelSpec, TrainConfig) {
        let records = (0..16)
            .map(|i| {
                let level = (i % 8) as f32 / 8.0;
                let mut values = vec![level; LEAD_COUNT * SAMPLES_PER_LEAD];
                for lead in 0..LEAD_COUNT {
                    values[lead * SAMPLES_PER_LEAD] = 0.0;
                    values[lead * SAMPLES_PER_LEAD + 1] = 1.0;
                }
                LabeledRecord::new(
                    format!("t{i:02}"),
                    EcgMatrix::from_values(values).unwrap(),
                    Some(ClassLabel::from_index(i % 5).unwrap()),
                    RegressionTargets {
                        hr_bpm: Some(50.0 + 10.0 * level as f64),
                        ..Default::default()
                    },
                )
                .unwrap()
            })
            .collect();
        let spec = ModelSpec::Cnn {
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
            head: HeadKind::Regression,
        };
        let cfg = TrainConfig {
            max_epochs: 2,
            batch_size: 8,
            ..Default::default()
        };
        (records, spec, cfg)
    }

    #[test]
    fn resume_reproduces_the_uninterrupted_trajectory() {
        let (records, spec, _) = tiny_regression_setup();
        let (train, val) = records.split_at(12);
        let task = Task::Regression(RegressionParam::Hr);

        let full_cfg = TrainConfig {
            max_epochs: 6,
            batch_size: 8,
            ..Default::default()
        };
        let uninterrupted = fit(
            Network::build(&spec, 3).unwrap(),
            train,
            val,
            task,
            &full_cfg,
            11,
        )
        .unwrap();

        // same run, stopped at epoch 3, checkpointed, reloaded, continued
        let half_cfg = TrainConfig {
            max_epochs: 3,
            batch_size: 8,
            ..Default::default()
        };
        let first = fit(
            Network::build(&spec, 3).unwrap(),
            train,
            val,
            task,
            &half_cfg,
            11,
        )
        .unwrap();
        let bytes = checkpoint::encode(&first.last, "d");
        let (mut resumed, _) = checkpoint::decode(&bytes).unwrap();
        resumed.config.max_epochs = 6;
        let resumed = fit_from(resumed, train, val).unwrap();

        assert_eq!(resumed.last.history, uninterrupted.last.history);
        assert!(resumed
            .last
            .network
            .params_equal(&uninterrupted.last.network));
    }

    #[test]
    fn recurrent_baselines_train_through_fit() {
        let (records, _, _) = tiny_regression_setup();
        let (train, val) = records.split_at(12);
        let cfg = TrainConfig {
            max_epochs: 2,
            batch_size: 8,
            ..Default::default()
        };
        for kind in [crate::model::ModelKind::Rnn, crate::model::ModelKind::Lstm] {
            let spec = ModelSpec::Recurrent {
                kind,
                config: crate::model::RecurrentConfig {
                    input_features: LEAD_COUNT,
                    input_len: SAMPLES_PER_LEAD,
                    hidden: 4,
                    layers: 2,
                    stride: 250,
                },
                head: HeadKind::Regression,
            };
            let before = Network::build(&spec, 2).unwrap();
            let outcome = fit(
                before.clone(),
                train,
                val,
                Task::Regression(RegressionParam::Hr),
                &cfg,
                6,
            )
            .unwrap();
            assert_eq!(outcome.last.epoch, 2);
            assert!(outcome.last.history.rows.iter().all(|r| r.train_loss.is_finite()));
            assert!(
                !outcome.last.network.params_equal(&before),
                "{kind:?} parameters did not move"
            );
        }
    }

    #[test]
    fn median_final_loss_improves_over_initial_across_seeds() {
        let (records, spec, _) = tiny_regression_setup();
        let (train, val) = records.split_at(12);
        let cfg = TrainConfig {
            max_epochs: 8,
            batch_size: 8,
            ..Default::default()
        };
        let mut ratios = Vec::new();
        for seed in 0..5u64 {
            let outcome = fit(
                Network::build(&spec, seed).unwrap(),
                train,
                val,
                Task::Regression(RegressionParam::Hr),
                &cfg,
                seed,
            )
            .unwrap();
            let first = outcome.last.history.rows.first().unwrap().train_loss;
            let last = outcome.last.history.rows.last().unwrap().train_loss;
            ratios.push(last / first);
        }
        ratios.sort_by(f64::total_cmp);
        assert!(
            ratios[2] < 1.0,
            "median final/initial loss ratio {} not below 1",
            ratios[2]
        );
    }
}
