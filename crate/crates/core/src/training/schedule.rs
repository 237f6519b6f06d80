//! Training configuration and the exponential learning-rate schedule:
//! lr(epoch) = initial_lr * gamma^epoch, decayed unconditionally once per
//! epoch. "Patience" is the early-stopping window on the validation metric;
//! the schedule itself never pauses.

use crate::config::KvConfig;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub initial_lr: f64,
    pub gamma: f64,
    pub patience: u32,
    pub max_epochs: u32,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            initial_lr: 0.01,
            gamma: 0.99,
            patience: 50,
            max_epochs: 500,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn render_into(&self, cfg: &mut KvConfig) {
        cfg.set("training", "initial_lr", self.initial_lr);
        cfg.set("training", "gamma", self.gamma);
        cfg.set("training", "patience", self.patience);
        cfg.set("training", "max_epochs", self.max_epochs);
        cfg.set("training", "batch_size", self.batch_size);
        cfg.set("training", "beta1", self.beta1);
        cfg.set("training", "beta2", self.beta2);
        cfg.set("training", "epsilon", self.epsilon);
    }

    pub fn parse_from(cfg: &KvConfig) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let parsed = TrainConfig {
            initial_lr: cfg.get_f64("training", "initial_lr")?.unwrap_or(d.initial_lr),
            gamma: cfg.get_f64("training", "gamma")?.unwrap_or(d.gamma),
            patience: cfg.get_u64("training", "patience")?.unwrap_or(d.patience as u64) as u32,
            max_epochs: cfg.get_u64("training", "max_epochs")?.unwrap_or(d.max_epochs as u64)
                as u32,
            batch_size: cfg.get_usize("training", "batch_size")?.unwrap_or(d.batch_size),
            beta1: cfg.get_f64("training", "beta1")?.unwrap_or(d.beta1),
            beta2: cfg.get_f64("training", "beta2")?.unwrap_or(d.beta2),
            epsilon: cfg.get_f64("training", "epsilon")?.unwrap_or(d.epsilon),
        };
        if parsed.initial_lr.is_nan() || parsed.initial_lr <= 0.0 {
            return Err(crate::Error::ConfigInvalid(
                "initial_lr must be positive".into(),
            ));
        }
        if parsed.batch_size == 0 || parsed.batch_size > 32 {
            return Err(crate::Error::ConfigInvalid(format!(
                "batch_size must lie in 1..=32, got {}",
                parsed.batch_size
            )));
        }
        Ok(parsed)
    }
}

/// Closed-form learning rate at an epoch.
pub fn lr_at_epoch(config: &TrainConfig, epoch: u32) -> f64 {
    config.initial_lr * config.gamma.powi(epoch as i32)
}

/// Scheduler position within a run; `current_lr` is always the closed form,
/// never an iterated product.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerState {
    pub initial_lr: f64,
    pub gamma: f64,
    pub epoch: u32,
}

impl SchedulerState {
    pub fn current_lr(&self) -> f64 {
        self.initial_lr * self.gamma.powi(self.epoch as i32)
    }
}
