//! Deterministic batching. Records are emitted exactly once per epoch; the
//! shuffle is a pure function of (seed, epoch) so interrupted runs can be
//! resumed without drift.

use rand_chacha::ChaCha8Rng;

use super::labels::{one_hot, LabeledRecord, RegressionParam, CLASS_COUNT};
use crate::model::tensor::{Tensor2, Tensor3};
use crate::signal::{LEAD_COUNT, SAMPLES_PER_LEAD};
use crate::{rng, Error, Result};

pub const DEFAULT_BATCH_SIZE: usize = 32;

/// What the model is being trained or evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classification,
    Regression(RegressionParam),
}

impl Task {
    pub fn describe(&self) -> String {
        match self {
            Task::Classification => "classification".to_string(),
            Task::Regression(p) => format!("regression({})", p.key()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum BatchTargets {
    /// One-hot rows, `[batch x 5]`.
    OneHot(Tensor2),
    /// Scalar regression targets, one per record.
    Scalar(Vec<f64>),
}

/// One training batch: signals as `[batch x 8 x 5000]` plus targets.
#[derive(Debug, Clone)]
pub struct Batch {
    pub signals: Tensor3,
    pub targets: BatchTargets,
    /// Indices into the source record slice, in emission order.
    pub indices: Vec<usize>,
}

/// Iterator over one epoch of batches.
pub struct BatchIter<'a> {
    records: &'a [LabeledRecord],
    order: Vec<usize>,
    task: Task,
    batch_size: usize,
    pos: usize,
}

/// Build a batch iterator over the usable records of a split.
///
/// Records lacking the requested regression target (or, for classification,
/// a class label) are excluded up front; `excluded` reports how many.
/// `shuffle` of `Some((seed, epoch))` yields the deterministic per-epoch
/// order; `None` keeps ascending record order (evaluation).
pub fn batch_iter<'a>(
    records: &'a [LabeledRecord],
    task: Task,
    batch_size: usize,
    shuffle: Option<(u64, u32)>,
) -> Result<(BatchIter<'a>, usize)> {
    assert!(batch_size > 0);
    let usable: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| match task {
            Task::Classification => r.label.is_some(),
            Task::Regression(p) => r.targets.get(p).is_some(),
        })
        .map(|(i, _)| i)
        .collect();
    let excluded = records.len() - usable.len();
    if usable.is_empty() {
        return Err(Error::EmptySplit(task.describe()));
    }
    let mut order = usable;
    if let Some((seed, epoch)) = shuffle {
        let mut rng: ChaCha8Rng = rng::seeded(rng::mix3(seed, 0xBA7C4, epoch as u64));
        rng::shuffle(&mut rng, &mut order);
    }
    Ok((
        BatchIter {
            records,
            order,
            task,
            batch_size,
            pos: 0,
        },
        excluded,
    ))
}

impl Iterator for BatchIter<'_> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        if self.pos >= self.order.len() {
            return None;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let indices: Vec<usize> = self.order[self.pos..end].to_vec();
        self.pos = end;

        let b = indices.len();
        let mut signals = Tensor3::zeros(b, LEAD_COUNT, SAMPLES_PER_LEAD);
        for (bi, &ri) in indices.iter().enumerate() {
            let values = self.records[ri].signal.values();
            let row = &mut signals.data
                [bi * LEAD_COUNT * SAMPLES_PER_LEAD..(bi + 1) * LEAD_COUNT * SAMPLES_PER_LEAD];
            for (dst, &src) in row.iter_mut().zip(values) {
                *dst = src as f64;
            }
        }
        let targets = match self.task {
            Task::Classification => {
                let mut t = Tensor2::zeros(b, CLASS_COUNT);
                for (bi, &ri) in indices.iter().enumerate() {
                    let row = one_hot(self.records[ri].label.expect("filtered"));
                    t.row_mut(bi).copy_from_slice(&row);
                }
                BatchTargets::OneHot(t)
            }
            Task::Regression(p) => BatchTargets::Scalar(
                indices
                    .iter()
                    .map(|&ri| self.records[ri].targets.get(p).expect("filtered"))
                    .collect(),
            ),
        };
        Some(Batch {
            signals,
            targets,
            indices,
        })
    }
}
